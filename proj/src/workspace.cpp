#include "align/workspace.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <ctime>

#include <fmt/format.h>

#include "align/catalog.h"
#include "align/error.h"

namespace align {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Clock clock_from_env() {
  if (const char* fixed = std::getenv(kFixedTimeEnv); fixed != nullptr && *fixed != '\0') {
    return [value = std::string(fixed)] { return value; };
  }
  return utc_now;
}

std::filesystem::path resolve_data_dir(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') return env;
  return "align-data";
}

DirectoryLock::DirectoryLock(const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto path = dir / ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::kInternal, fmt::format("cannot open lock file {}", path.string()));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kLockHeld,
                fmt::format("data directory {} is locked by another process", dir.string()));
  }
}

DirectoryLock::~DirectoryLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

Transition parse_transition(std::string_view s) {
  if (s == "open-collection") return Transition::kOpenCollection;
  if (s == "close-collection") return Transition::kCloseCollection;
  if (s == "finalize") return Transition::kFinalize;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown transition: {} (expected open-collection, close-collection or finalize)", s),
              "transition");
}

Workspace::Workspace(std::filesystem::path data_dir, Clock clock, StoreOptions options)
    : store_(std::move(data_dir), options), clock_(std::move(clock)) {}

// --- models -----------------------------------------------------------------

std::vector<ModelSummary> Workspace::list_models() const {
  std::vector<ModelSummary> out;
  for (const auto& entry : builtin_catalog()) {
    out.push_back({entry.model.id, kBuiltinModelVersion, entry.model.name, true, entry.model.criteria.size(),
                   entry.model.practice_count()});
  }
  for (const auto& record : store_.list(RecordKind::kModel)) {
    const auto m = model(record.id, record.latest_version);
    out.push_back({m->id, record.latest_version, m->name, false, m->criteria.size(), m->practice_count()});
  }
  return out;
}

int Workspace::latest_model_version(const std::string& id) const {
  if (find_builtin(id) != nullptr) return kBuiltinModelVersion;
  if (const auto v = store_.latest_version(RecordKind::kModel, id)) return *v;
  throw Error(ErrorCode::kUnknownModel, fmt::format("unknown model: {}", id), "model_id");
}

std::shared_ptr<const MaturityModel> Workspace::model(const std::string& id, std::optional<int> version) const {
  if (const auto* entry = find_builtin(id)) {
    if (version && *version != kBuiltinModelVersion) {
      throw Error(ErrorCode::kUnknownModel, fmt::format("model {} has no version {}", id, *version), "model_id");
    }
    static const auto builtin = std::make_shared<const MaturityModel>(entry->model);
    return builtin;
  }
  const int v = version ? *version : latest_model_version(id);
  {
    std::lock_guard lock(models_mutex_);
    if (const auto it = model_cache_.find({id, v}); it != model_cache_.end()) return it->second;
  }
  nlohmann::json payload;
  try {
    validate_record_id(id);
    payload = store_.get(RecordKind::kModel, id, v);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound || e.code() == ErrorCode::kInvalidArgument) {
      throw Error(ErrorCode::kUnknownModel, fmt::format("unknown model: {} version {}", id, v), "model_id");
    }
    throw;
  }
  auto m = std::make_shared<const MaturityModel>(parse_model(payload.dump()));
  std::lock_guard lock(models_mutex_);
  model_cache_.emplace(std::make_pair(id, v), m);
  return m;
}

ModelRef Workspace::import_model(const MaturityModel& model) {
  if (const auto result = validate_model(model); !result.ok()) {
    const auto& first = result.violations.front();
    throw Error(ErrorCode::kInvalidModel,
                fmt::format("model has {} violation(s); first: {}", result.violations.size(), first.message),
                first.path);
  }
  if (find_builtin(model.id) != nullptr) {
    throw Error(ErrorCode::kImmutabilityViolation,
                fmt::format("model id {} is reserved for a built-in model", model.id), "id");
  }
  const int version = store_.put(RecordKind::kModel, model.id, nlohmann::json(model));
  return ModelRef{model.id, version};
}

// --- sessions -----------------------------------------------------------------

std::mutex& Workspace::session_mutex(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto& slot = session_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void Workspace::persist(const AssessmentSession& session) {
  store_.put(RecordKind::kSession, session.id(), session.to_json());
}

template <typename Fn>
AssessmentSession Workspace::mutate(const std::string& id, Fn&& fn) {
  std::lock_guard lock(session_mutex(id));
  auto session = load_session(id);
  fn(session);
  persist(session);
  return session;
}

AssessmentSession Workspace::load_session(const std::string& id) const {
  nlohmann::json payload;
  try {
    payload = store_.get(RecordKind::kSession, id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) {
      throw Error(ErrorCode::kNotFound, fmt::format("session {} not found", id), id);
    }
    throw;
  }
  const auto ref = payload.at("model_ref").get<ModelRef>();
  return AssessmentSession::from_json(payload, model(ref.id, ref.version));
}

std::vector<SessionSummary> Workspace::list_sessions() const {
  std::vector<SessionSummary> out;
  for (const auto& record : store_.list(RecordKind::kSession)) {
    const auto payload = store_.get(RecordKind::kSession, record.id, record.latest_version);
    out.push_back({record.id, record.latest_version, parse_phase(payload.at("phase").get<std::string>()),
                   payload.at("model_ref").get<ModelRef>(),
                   payload.at("org_profile").value("sector", std::string{})});
  }
  return out;
}

AssessmentSession Workspace::create_session(const NewSession& request) {
  auto m = model(request.model_id, request.model_version);
  const ModelRef ref{request.model_id, request.model_version.value_or(latest_model_version(request.model_id))};
  std::lock_guard lock(create_mutex_);
  std::string id;
  if (request.session_id) {
    id = *request.session_id;
    validate_record_id(id);
    const auto same_prefix = store_.list(RecordKind::kSession, {id, true});
    if (std::any_of(same_prefix.begin(), same_prefix.end(), [&](const RecordSummary& r) { return r.id == id; })) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("session {} already exists", id), "id");
    }
  } else {
    const auto taken = store_.list(RecordKind::kSession, {"", true});
    std::size_t n = taken.size() + 1;
    const auto exists = [&](const std::string& candidate) {
      return std::any_of(taken.begin(), taken.end(), [&](const RecordSummary& r) { return r.id == candidate; });
    };
    while (exists(fmt::format("session-{}", n))) ++n;
    id = fmt::format("session-{}", n);
  }
  auto session = AssessmentSession::create(std::move(m), {id, ref, request.org_profile, request.gathering_mode},
                                           clock_());
  persist(session);
  return session;
}

AssessmentSession Workspace::clone_session(const std::string& id) {
  const auto source = load_session(id);
  if (source.phase() != Phase::kFinalized && source.phase() != Phase::kReported) {
    throw Error(ErrorCode::kWrongPhase,
                fmt::format("only finalized sessions are cloned for correction; {} is {}", id,
                            to_string(source.phase())),
                "phase");
  }
  std::lock_guard lock(create_mutex_);
  const auto taken = store_.list(RecordKind::kSession, {"", true});
  std::size_t n = 1;
  const auto exists = [&](const std::string& candidate) {
    return std::any_of(taken.begin(), taken.end(), [&](const RecordSummary& r) { return r.id == candidate; });
  };
  while (exists(fmt::format("{}-r{}", id, n))) ++n;
  auto session = AssessmentSession::clone_from(source, fmt::format("{}-r{}", id, n), clock_());
  persist(session);
  return session;
}

AssessmentSession Workspace::add_assessor(const std::string& id, const Assessor& assessor) {
  return mutate(id, [&](AssessmentSession& s) { s.add_assessor(assessor, clock_()); });
}

TransitionResult Workspace::transition(const std::string& id, Transition transition) {
  std::vector<std::string> warnings;
  auto session = mutate(id, [&](AssessmentSession& s) {
    switch (transition) {
      case Transition::kOpenCollection:
        s.open_collection(clock_());
        warnings = s.team_warnings();
        break;
      case Transition::kCloseCollection:
        warnings = s.close_collection(clock_());
        break;
      case Transition::kFinalize:
        s.finalize(clock_());
        break;
    }
  });
  return {std::move(session), std::move(warnings)};
}

AssessmentSession Workspace::submit_responses(const std::string& id, std::span<const ResponseInput> batch) {
  return mutate(id, [&](AssessmentSession& s) { s.submit_responses(batch, clock_()); });
}

ImportResult Workspace::import_responses_csv(const std::string& id, std::string_view csv) {
  auto parsed = parse_responses_csv(csv);
  std::vector<CsvRejection> rejected = std::move(parsed.rejected);
  std::size_t applied = 0;
  std::lock_guard lock(session_mutex(id));
  auto session = load_session(id);
  std::vector<ResponseInput> valid;
  for (const auto& row : parsed.rows) {
    try {
      session.check_response(row.response);
      valid.push_back(row.response);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kWrongPhase) throw;
      rejected.push_back({row.line, std::string(e.machine_code()), e.what()});
    }
  }
  std::sort(rejected.begin(), rejected.end(),
            [](const CsvRejection& a, const CsvRejection& b) { return a.line < b.line; });
  if (!valid.empty()) {
    session.submit_responses(valid, clock_());
    persist(session);
    applied = valid.size();
  }
  return {std::move(session), applied, std::move(rejected)};
}

AssessmentSession Workspace::set_weights(const std::string& id, const WeightSet& weights) {
  return mutate(id, [&](AssessmentSession& s) { s.set_weights(weights, clock_()); });
}

AssessmentSession Workspace::record_consensus(const std::string& id, const ConsensusRecord& record) {
  return mutate(id, [&](AssessmentSession& s) { s.record_consensus(record, clock_()); });
}

AssessmentSession Workspace::adjust_overall(const std::string& id, double value, const std::string& rationale) {
  return mutate(id, [&](AssessmentSession& s) { s.adjust_overall(value, rationale, clock_()); });
}

AssessmentSession Workspace::finalize(const std::string& id) {
  return transition(id, Transition::kFinalize).session;
}

std::string Workspace::report(const std::string& id, ReportFormat format) {
  std::lock_guard lock(session_mutex(id));
  auto session = load_session(id);
  const auto at = clock_();
  if (session.mark_reported(to_string(format), at)) persist(session);
  return generate_report(session, format, at);
}

std::vector<ChartPoint> Workspace::chart(const std::string& id) const { return chart_data(load_session(id)); }

ScoreSummary Workspace::what_if(const std::string& id, const std::optional<WeightSet>& weights) const {
  const auto session = load_session(id);
  return score_session(session.scoring_input(weights ? &*weights : nullptr));
}

}  // namespace align
