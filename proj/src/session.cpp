#include "align/session.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "align/error.h"

namespace align {

namespace {

using nlohmann::json;

json opt_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

std::string_view to_string(ResponseChannel c) { return c == ResponseChannel::kJoint ? "joint" : "survey"; }

ResponseChannel parse_channel(std::string_view s) {
  if (s == "joint") return ResponseChannel::kJoint;
  if (s == "survey") return ResponseChannel::kSurvey;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown response channel: {}", s));
}

}  // namespace

std::string_view to_string(Phase v) {
  switch (v) {
    case Phase::kCreated: return "created";
    case Phase::kCollecting: return "collecting";
    case Phase::kConsensus: return "consensus";
    case Phase::kFinalized: return "finalized";
    case Phase::kReported: return "reported";
  }
  return "created";
}

std::string_view to_string(GatheringMode v) {
  switch (v) {
    case GatheringMode::kJoint: return "joint";
    case GatheringMode::kIndividualSurvey: return "individual-survey";
    case GatheringMode::kCombined: return "combined";
  }
  return "individual-survey";
}

std::string_view to_string(DomainRole v) { return v == DomainRole::kIT ? "IT" : "Business"; }

std::string_view to_string(Severity v) {
  switch (v) {
    case Severity::kLow: return "low";
    case Severity::kMedium: return "medium";
    case Severity::kHigh: return "high";
  }
  return "medium";
}

Phase parse_phase(std::string_view s) {
  for (auto p : {Phase::kCreated, Phase::kCollecting, Phase::kConsensus, Phase::kFinalized,
                 Phase::kReported})
    if (to_string(p) == s) return p;
  throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown phase: {}", s), "phase");
}

GatheringMode parse_gathering_mode(std::string_view s) {
  for (auto m : {GatheringMode::kJoint, GatheringMode::kIndividualSurvey, GatheringMode::kCombined})
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown gathering mode: {} (expected joint, individual-survey or combined)", s),
              "gathering_mode");
}

DomainRole parse_domain_role(std::string_view s) {
  if (s == "IT" || s == "it") return DomainRole::kIT;
  if (s == "Business" || s == "business") return DomainRole::kBusiness;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown domain role: {} (expected IT or Business)", s), "domain_role");
}

Severity parse_severity(std::string_view s) {
  for (auto v : {Severity::kLow, Severity::kMedium, Severity::kHigh})
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown severity: {} (expected low, medium or high)", s), "severity");
}

// --- construction ---------------------------------------------------------

AssessmentSession AssessmentSession::create(std::shared_ptr<const MaturityModel> model,
                                            const CreateRequest& request, const std::string& at) {
  if (!model) throw Error(ErrorCode::kUnknownModel, "no model supplied");
  if (const auto result = validate_model(*model); !result.ok()) {
    throw Error(ErrorCode::kInvalidModel,
                fmt::format("model {} is invalid: {}", model->id, result.violations.front().message),
                result.violations.front().path);
  }
  if (request.model_ref.id != model->id) {
    throw Error(ErrorCode::kUnknownModel,
                fmt::format("model reference {} does not match model {}", request.model_ref.id, model->id));
  }
  if (request.session_id.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "session id is empty", "id");
  }
  if (request.org_profile.sector.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "organization sector is required", "org_profile.sector");
  }
  if (request.org_profile.approx_customer_count < 0) {
    throw Error(ErrorCode::kInvalidArgument, "customer count must be non-negative",
                "org_profile.approx_customer_count");
  }
  AssessmentSession s(std::move(model));
  s.append("created",
           {{"session_id", request.session_id},
            {"model_ref", request.model_ref},
            {"org_profile", request.org_profile},
            {"gathering_mode", std::string(to_string(request.gathering_mode))},
            {"weights", default_weights(*s.model_)}},
           at);
  return s;
}

AssessmentSession AssessmentSession::clone_from(const AssessmentSession& source, std::string new_id,
                                                const std::string& at) {
  if (new_id.empty()) throw Error(ErrorCode::kInvalidArgument, "session id is empty", "id");
  json adjustment = nullptr;
  if (source.adjustment_) {
    adjustment = {{"value", source.adjustment_->value}, {"rationale", source.adjustment_->rationale}};
  }
  AssessmentSession s(source.model_);
  s.append("cloned",
           {{"session_id", std::move(new_id)},
            {"source_session_id", source.id_},
            {"model_ref", source.model_ref_},
            {"org_profile", source.org_profile_},
            {"gathering_mode", std::string(to_string(source.gathering_mode_))},
            {"assessors", source.assessors_},
            {"responses", source.responses_},
            {"weights", source.weights_},
            {"consensus_records", source.consensus_},
            {"overall_adjustment", adjustment}},
           at);
  return s;
}

AssessmentSession AssessmentSession::replay(std::shared_ptr<const MaturityModel> model,
                                            std::span<const AuditEvent> log) {
  if (log.empty() || (log.front().type != "created" && log.front().type != "cloned")) {
    throw Error(ErrorCode::kInvalidArgument, "audit log must start with a created or cloned event");
  }
  AssessmentSession s(std::move(model));
  for (const auto& event : log) {
    if (event.seq != s.audit_.size() + 1) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("audit log out of sequence at seq {}", event.seq));
    }
    s.apply(event);
    s.audit_.push_back(event);
  }
  return s;
}

// --- mutations --------------------------------------------------------------

void AssessmentSession::append(std::string type, nlohmann::json data, const std::string& at) {
  AuditEvent event{audit_.size() + 1, at, std::move(type), std::move(data)};
  apply(event);
  audit_.push_back(std::move(event));
}

void AssessmentSession::require_phase(std::initializer_list<Phase> allowed, std::string_view op) const {
  if (std::find(allowed.begin(), allowed.end(), phase_) != allowed.end()) return;
  throw Error(ErrorCode::kWrongPhase,
              fmt::format("{} is not allowed while session {} is {}", op, id_, to_string(phase_)),
              "phase");
}

bool AssessmentSession::accepts_responses() const {
  if (phase_ == Phase::kCollecting) return true;
  return phase_ == Phase::kConsensus && gathering_mode_ != GatheringMode::kIndividualSurvey;
}

void AssessmentSession::add_assessor(const Assessor& assessor, const std::string& at) {
  if (gathering_mode_ == GatheringMode::kIndividualSurvey) {
    require_phase({Phase::kCreated, Phase::kCollecting}, "add-assessor");
  } else {
    require_phase({Phase::kCreated, Phase::kCollecting, Phase::kConsensus}, "add-assessor");
  }
  if (assessor.id.empty()) throw Error(ErrorCode::kInvalidArgument, "assessor id is empty", "id");
  const bool taken = std::any_of(assessors_.begin(), assessors_.end(),
                                 [&](const Assessor& a) { return a.id == assessor.id; });
  if (taken) {
    throw Error(ErrorCode::kDuplicateAssessor,
                fmt::format("assessor {} already belongs to session {}", assessor.id, id_), "id");
  }
  append("assessor-added", {{"assessor", assessor}}, at);
}

void AssessmentSession::open_collection(const std::string& at) {
  require_phase({Phase::kCreated}, "open-collection");
  append("collection-opened", json::object(), at);
}

void AssessmentSession::check_response(const ResponseInput& r) const {
  if (!accepts_responses()) {
    throw Error(ErrorCode::kWrongPhase,
                fmt::format("responses are not accepted while session {} is {} ({} mode)", id_,
                            to_string(phase_), to_string(gathering_mode_)),
                "phase");
  }
  const bool known = std::any_of(assessors_.begin(), assessors_.end(),
                                 [&](const Assessor& a) { return a.id == r.assessor_id; });
  if (!known) {
    throw Error(ErrorCode::kUnknownAssessor,
                fmt::format("assessor {} is not part of session {}", r.assessor_id, id_),
                "assessor_id");
  }
  if (find_practice(*model_, r.practice_id) == nullptr) {
    throw Error(ErrorCode::kUnknownPractice, fmt::format("unknown practice: {}", r.practice_id),
                "practice_id");
  }
  if (r.level < kMinLevel || r.level > kMaxLevel) {
    throw Error(ErrorCode::kLevelOutOfRange,
                fmt::format("level {} outside {}..{}", r.level, kMinLevel, kMaxLevel), "level");
  }
}

void AssessmentSession::submit_responses(std::span<const ResponseInput> batch, const std::string& at) {
  if (!accepts_responses()) check_response(ResponseInput{});
  if (batch.empty()) throw Error(ErrorCode::kEmptyInput, "no responses submitted", "responses");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    try {
      check_response(batch[i]);
    } catch (const Error& e) {
      const auto path = batch.size() == 1 ? e.path() : fmt::format("responses[{}].{}", i, e.path());
      throw Error(e.code(), e.what(), path);
    }
  }
  const auto channel = phase_ == Phase::kCollecting ? ResponseChannel::kSurvey : ResponseChannel::kJoint;

  json responses = json::array();
  json replaced = json::array();
  // Tracks replacements inside this batch too, so the audit names every prior value.
  std::vector<IndividualResponse> effective = responses_;
  for (const auto& r : batch) {
    IndividualResponse next{r.assessor_id, r.practice_id, r.level, r.comment, at, channel};
    auto it = std::find_if(effective.begin(), effective.end(), [&](const IndividualResponse& e) {
      return e.assessor_id == r.assessor_id && e.practice_id == r.practice_id;
    });
    if (it != effective.end()) {
      replaced.push_back({{"assessor_id", it->assessor_id},
                          {"practice_id", it->practice_id},
                          {"previous_level", it->level},
                          {"previous_submitted_at", it->submitted_at},
                          {"previous_channel", std::string(to_string(it->channel))},
                          {"cross_mode_duplicate", it->channel != channel}});
      *it = next;
    } else {
      effective.push_back(next);
    }
    responses.push_back(next);
  }
  append("responses-submitted", {{"responses", responses}, {"replaced", replaced}}, at);
}

std::vector<std::string> AssessmentSession::team_warnings() const {
  std::vector<std::string> out;
  if (assessors_.size() < 2) {
    out.push_back(fmt::format("team has {} assessor(s); cross-domain discussion needs at least 2",
                              assessors_.size()));
  }
  const auto has_role = [&](DomainRole role) {
    return std::any_of(assessors_.begin(), assessors_.end(),
                       [&](const Assessor& a) { return a.domain_role == role; });
  };
  if (!assessors_.empty() && !has_role(DomainRole::kIT)) out.emplace_back("team has no IT assessor");
  if (!assessors_.empty() && !has_role(DomainRole::kBusiness)) {
    out.emplace_back("team has no Business assessor");
  }
  return out;
}

std::vector<std::string> AssessmentSession::close_collection(const std::string& at) {
  require_phase({Phase::kCollecting}, "close-collection");
  if (assessors_.empty()) {
    throw Error(ErrorCode::kNoAssessors,
                fmt::format("cannot close collection of session {}: no assessors", id_), "assessors");
  }
  auto warnings = team_warnings();
  append("collection-closed", {{"warnings", warnings}}, at);
  return warnings;
}

void AssessmentSession::set_weights(const WeightSet& weights, const std::string& at) {
  require_phase({Phase::kCollecting, Phase::kConsensus}, "set-weights");
  try {
    validate_weights(*model_, weights);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidWeights) throw;
    throw Error(ErrorCode::kInvalidWeights, e.what(), e.path());
  }
  append("weights-set", {{"before", weights_}, {"after", weights}}, at);
}

void AssessmentSession::record_consensus(const ConsensusRecord& record, const std::string& at) {
  require_phase({Phase::kConsensus}, "record-consensus");
  if (find_practice(*model_, record.practice_id) == nullptr) {
    throw Error(ErrorCode::kUnknownPractice, fmt::format("unknown practice: {}", record.practice_id),
                "practice_id");
  }
  if (!std::isfinite(record.agreed_score) || record.agreed_score < kMinLevel ||
      record.agreed_score > kMaxLevel) {
    throw Error(ErrorCode::kScoreOutOfRange,
                fmt::format("agreed score {} outside [{}, {}]", record.agreed_score, kMinLevel, kMaxLevel),
                "agreed_score");
  }
  for (std::size_t i = 0; i < record.gaps.size(); ++i) {
    if (record.gaps[i].description.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "gap description is empty",
                  fmt::format("gaps[{}].description", i));
    }
  }
  const auto* previous = find_consensus(record.practice_id);
  append("consensus-recorded",
         {{"record", record}, {"previous", previous ? json(*previous) : json(nullptr)}}, at);
}

void AssessmentSession::adjust_overall(double value, const std::string& rationale,
                                       const std::string& at) {
  require_phase({Phase::kConsensus}, "adjust-overall");
  // Same range and rationale rules as the scoring engine.
  (void)apply_overall_adjustment(OverallScore{kMinLevel, std::nullopt, {}}, value, rationale);
  json previous = nullptr;
  if (adjustment_) previous = {{"value", adjustment_->value}, {"rationale", adjustment_->rationale}};
  append("overall-adjusted", {{"value", value}, {"rationale", rationale}, {"previous", previous}}, at);
}

void AssessmentSession::finalize(const std::string& at) {
  require_phase({Phase::kConsensus}, "finalize");
  // Fails with unscorable-practice before anything is recorded.
  (void)score_session(scoring_input());
  append("finalized", json::object(), at);
}

bool AssessmentSession::mark_reported(std::string_view format, const std::string& at) {
  require_phase({Phase::kFinalized, Phase::kReported}, "report");
  if (phase_ == Phase::kReported) return false;
  append("report-generated", {{"format", std::string(format)}}, at);
  return true;
}

void AssessmentSession::apply(const AuditEvent& event) {
  const auto& d = event.data;
  const auto& type = event.type;
  if (type == "created" || type == "cloned") {
    id_ = d.at("session_id").get<std::string>();
    model_ref_ = d.at("model_ref").get<ModelRef>();
    org_profile_ = d.at("org_profile").get<OrgProfile>();
    gathering_mode_ = parse_gathering_mode(d.at("gathering_mode").get<std::string>());
    weights_ = d.at("weights").get<WeightSet>();
    phase_ = Phase::kCreated;
    if (type == "cloned") {
      cloned_from_ = d.at("source_session_id").get<std::string>();
      assessors_ = d.at("assessors").get<std::vector<Assessor>>();
      responses_ = d.at("responses").get<std::vector<IndividualResponse>>();
      consensus_ = d.at("consensus_records").get<std::vector<ConsensusRecord>>();
      if (!d.at("overall_adjustment").is_null()) {
        adjustment_ = OverallAdjustment{d.at("overall_adjustment").at("value").get<double>(),
                                        d.at("overall_adjustment").at("rationale").get<std::string>()};
      }
      phase_ = Phase::kConsensus;
    }
  } else if (type == "assessor-added") {
    assessors_.push_back(d.at("assessor").get<Assessor>());
  } else if (type == "collection-opened") {
    phase_ = Phase::kCollecting;
  } else if (type == "responses-submitted") {
    for (const auto& rj : d.at("responses")) {
      auto r = rj.get<IndividualResponse>();
      auto it = std::find_if(responses_.begin(), responses_.end(), [&](const IndividualResponse& e) {
        return e.assessor_id == r.assessor_id && e.practice_id == r.practice_id;
      });
      if (it != responses_.end()) {
        *it = std::move(r);
      } else {
        responses_.push_back(std::move(r));
      }
    }
  } else if (type == "collection-closed") {
    phase_ = Phase::kConsensus;
  } else if (type == "weights-set") {
    weights_ = d.at("after").get<WeightSet>();
  } else if (type == "consensus-recorded") {
    auto record = d.at("record").get<ConsensusRecord>();
    auto it = std::find_if(consensus_.begin(), consensus_.end(), [&](const ConsensusRecord& c) {
      return c.practice_id == record.practice_id;
    });
    if (it != consensus_.end()) {
      *it = std::move(record);
    } else {
      consensus_.push_back(std::move(record));
    }
  } else if (type == "overall-adjusted") {
    adjustment_ = OverallAdjustment{d.at("value").get<double>(), d.at("rationale").get<std::string>()};
  } else if (type == "finalized") {
    scores_ = score_session(scoring_input());
    phase_ = Phase::kFinalized;
  } else if (type == "report-generated") {
    phase_ = Phase::kReported;
  } else {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("unknown audit event type: {}", type));
  }
}

// --- queries ----------------------------------------------------------------

ScoringInput AssessmentSession::scoring_input(const WeightSet* weights_override) const {
  ScoringInput input;
  input.model = model_.get();
  for (const auto& r : responses_) input.levels[r.practice_id].push_back(r.level);
  for (const auto& c : consensus_) input.consensus[c.practice_id] = c.agreed_score;
  input.weights = weights_override ? *weights_override : weights_;
  if (adjustment_) input.overall_adjustment = std::make_pair(adjustment_->value, adjustment_->rationale);
  return input;
}

const IndividualResponse* AssessmentSession::find_response(std::string_view assessor_id,
                                                           std::string_view practice_id) const {
  for (const auto& r : responses_)
    if (r.assessor_id == assessor_id && r.practice_id == practice_id) return &r;
  return nullptr;
}

const ConsensusRecord* AssessmentSession::find_consensus(std::string_view practice_id) const {
  for (const auto& c : consensus_)
    if (c.practice_id == practice_id) return &c;
  return nullptr;
}

nlohmann::json AssessmentSession::to_json() const {
  json j = {{"id", id_},
            {"model_ref", model_ref_},
            {"org_profile", org_profile_},
            {"gathering_mode", std::string(to_string(gathering_mode_))},
            {"phase", std::string(to_string(phase_))},
            {"assessors", assessors_},
            {"responses", responses_},
            {"weights", weights_},
            {"consensus_records", consensus_},
            {"audit_log", audit_}};
  j["overall_adjustment"] =
      adjustment_ ? json{{"value", adjustment_->value}, {"rationale", adjustment_->rationale}}
                  : json(nullptr);
  j["scores"] = scores_ ? json(*scores_) : json(nullptr);
  j["cloned_from"] = opt_json(cloned_from_);
  return j;
}

AssessmentSession AssessmentSession::from_json(const nlohmann::json& j,
                                               std::shared_ptr<const MaturityModel> model) {
  AssessmentSession s(std::move(model));
  try {
    j.at("id").get_to(s.id_);
    j.at("model_ref").get_to(s.model_ref_);
    j.at("org_profile").get_to(s.org_profile_);
    s.gathering_mode_ = parse_gathering_mode(j.at("gathering_mode").get<std::string>());
    s.phase_ = parse_phase(j.at("phase").get<std::string>());
    j.at("assessors").get_to(s.assessors_);
    j.at("responses").get_to(s.responses_);
    j.at("weights").get_to(s.weights_);
    j.at("consensus_records").get_to(s.consensus_);
    j.at("audit_log").get_to(s.audit_);
    if (!j.at("overall_adjustment").is_null()) {
      s.adjustment_ = OverallAdjustment{j.at("overall_adjustment").at("value").get<double>(),
                                        j.at("overall_adjustment").at("rationale").get<std::string>()};
    }
    if (!j.at("scores").is_null()) s.scores_ = j.at("scores").get<ScoreSummary>();
    s.cloned_from_ = opt_string(j, "cloned_from");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("malformed session document: {}", e.what()));
  }
  if (s.model_ == nullptr || s.model_->id != s.model_ref_.id) {
    throw Error(ErrorCode::kUnknownModel,
                fmt::format("session {} needs model {}", s.id_, s.model_ref_.id));
  }
  return s;
}

// --- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const ModelRef& v) { j = {{"id", v.id}, {"version", v.version}}; }
void from_json(const nlohmann::json& j, ModelRef& v) {
  j.at("id").get_to(v.id);
  v.version = j.value("version", 1);
}

void to_json(nlohmann::json& j, const OrgProfile& v) {
  j = {{"sector", v.sector},
       {"employee_band", v.employee_band},
       {"activity_description", v.activity_description},
       {"approx_customer_count", v.approx_customer_count}};
}
void from_json(const nlohmann::json& j, OrgProfile& v) {
  j.at("sector").get_to(v.sector);
  v.employee_band = j.value("employee_band", std::string{});
  v.activity_description = j.value("activity_description", std::string{});
  v.approx_customer_count = j.value("approx_customer_count", std::int64_t{0});
}

void to_json(nlohmann::json& j, const Assessor& v) {
  j = {{"id", v.id}, {"display_name", v.display_name}, {"domain_role", std::string(to_string(v.domain_role))}};
}
void from_json(const nlohmann::json& j, Assessor& v) {
  j.at("id").get_to(v.id);
  v.display_name = j.value("display_name", v.id);
  v.domain_role = parse_domain_role(j.at("domain_role").get<std::string>());
}

void to_json(nlohmann::json& j, const ResponseInput& v) {
  j = {{"assessor_id", v.assessor_id}, {"practice_id", v.practice_id}, {"level", v.level},
       {"comment", opt_json(v.comment)}};
}
void from_json(const nlohmann::json& j, ResponseInput& v) {
  j.at("assessor_id").get_to(v.assessor_id);
  j.at("practice_id").get_to(v.practice_id);
  j.at("level").get_to(v.level);
  v.comment = opt_string(j, "comment");
}

void to_json(nlohmann::json& j, const IndividualResponse& v) {
  j = {{"assessor_id", v.assessor_id}, {"practice_id", v.practice_id}, {"level", v.level},
       {"comment", opt_json(v.comment)}, {"submitted_at", v.submitted_at},
       {"channel", std::string(to_string(v.channel))}};
}
void from_json(const nlohmann::json& j, IndividualResponse& v) {
  j.at("assessor_id").get_to(v.assessor_id);
  j.at("practice_id").get_to(v.practice_id);
  j.at("level").get_to(v.level);
  v.comment = opt_string(j, "comment");
  j.at("submitted_at").get_to(v.submitted_at);
  v.channel = parse_channel(j.at("channel").get<std::string>());
}

void to_json(nlohmann::json& j, const GapNote& v) {
  j = {{"description", v.description}, {"severity", std::string(to_string(v.severity))}};
}
void from_json(const nlohmann::json& j, GapNote& v) {
  j.at("description").get_to(v.description);
  v.severity = parse_severity(j.value("severity", std::string("medium")));
}

void to_json(nlohmann::json& j, const ConsensusRecord& v) {
  j = {{"practice_id", v.practice_id}, {"agreed_score", v.agreed_score}, {"gaps", v.gaps},
       {"actions", v.actions}};
}
void from_json(const nlohmann::json& j, ConsensusRecord& v) {
  j.at("practice_id").get_to(v.practice_id);
  j.at("agreed_score").get_to(v.agreed_score);
  v.gaps = j.value("gaps", std::vector<GapNote>{});
  v.actions = j.value("actions", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const AuditEvent& v) {
  j = {{"seq", v.seq}, {"at", v.at}, {"type", v.type}, {"data", v.data}};
}
void from_json(const nlohmann::json& j, AuditEvent& v) {
  j.at("seq").get_to(v.seq);
  j.at("at").get_to(v.at);
  j.at("type").get_to(v.type);
  v.data = j.at("data");
}

// --- CSV import ---------------------------------------------------------------

namespace {

// Splits one logical CSV record; quoted fields may contain commas, doubled
// quotes and newlines. Advances `pos` past the record terminator.
std::vector<std::string> next_record(std::string_view text, std::size_t& pos, std::size_t& line,
                                     bool& malformed) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  malformed = false;
  while (pos < text.size()) {
    const char c = text[pos];
    if (quoted) {
      if (c == '"') {
        if (pos + 1 < text.size() && text[pos + 1] == '"') {
          fields.back().push_back('"');
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      if (!fields.back().empty()) malformed = true;
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c == '\r') {
      // tolerated before \n
    } else if (c == '\n') {
      ++pos;
      ++line;
      return fields;
    } else {
      fields.back().push_back(c);
    }
    ++pos;
  }
  if (quoted) malformed = true;
  ++line;
  return fields;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

CsvParseResult parse_responses_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvParseResult out;
  std::size_t pos = 0;
  std::size_t line = 1;
  bool malformed = false;
  const auto header_fields = next_record(text, pos, line, malformed);
  std::vector<std::string> header;
  for (const auto& f : header_fields) header.push_back(trim(f));
  const std::vector<std::string> expected{"assessor_id", "practice_id", "level", "comment"};
  const std::vector<std::string> expected_short(expected.begin(), expected.end() - 1);
  if (header != expected && header != expected_short) {
    throw Error(ErrorCode::kInvalidArgument,
                "CSV header must be assessor_id,practice_id,level,comment", "line 1");
  }
  while (pos < text.size()) {
    const std::size_t record_line = line;
    auto fields = next_record(text, pos, line, malformed);
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;  // blank line
    if (malformed) {
      out.rejected.push_back({record_line, "invalid-argument", "unbalanced quotes"});
      continue;
    }
    if (fields.size() < 3 || fields.size() > 4) {
      out.rejected.push_back({record_line, "invalid-argument",
                              fmt::format("expected 3 or 4 fields, found {}", fields.size())});
      continue;
    }
    ResponseInput r;
    r.assessor_id = trim(fields[0]);
    r.practice_id = trim(fields[1]);
    const auto level_text = trim(fields[2]);
    std::size_t consumed = 0;
    try {
      r.level = std::stoi(level_text, &consumed);
    } catch (const std::exception&) {
      consumed = 0;
    }
    if (level_text.empty() || consumed != level_text.size()) {
      out.rejected.push_back({record_line, std::string(to_string(ErrorCode::kLevelOutOfRange)),
                              fmt::format("level '{}' is not an integer 1..5", level_text)});
      continue;
    }
    if (fields.size() == 4 && !fields[3].empty()) r.comment = fields[3];
    out.rows.push_back({record_line, std::move(r)});
  }
  return out;
}

}  // namespace align
