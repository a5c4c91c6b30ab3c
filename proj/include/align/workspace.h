#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "align/report.h"
#include "align/rubric.h"
#include "align/scoring.h"
#include "align/session.h"
#include "align/store.h"

namespace align {

inline constexpr const char* kDataDirEnv = "ALIGN_ASSESS_DATA_DIR";
// When set, every timestamp equals this value (reproducible runs).
inline constexpr const char* kFixedTimeEnv = "ALIGN_ASSESS_FIXED_TIME";

// Returns a UTC ISO 8601 timestamp.
using Clock = std::function<std::string()>;

std::string utc_now();
// Fixed clock when ALIGN_ASSESS_FIXED_TIME is set, system clock otherwise.
Clock clock_from_env();

// Flag wins over environment; falls back to ./align-data.
std::filesystem::path resolve_data_dir(const std::optional<std::string>& flag);

// Exclusive advisory lock on a data directory, held for the object's lifetime.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

struct ModelSummary {
  std::string id;
  int version = 0;
  std::string name;
  bool builtin = false;
  std::size_t criteria = 0;
  std::size_t practices = 0;
};

struct SessionSummary {
  std::string id;
  int version = 0;
  Phase phase = Phase::kCreated;
  ModelRef model_ref;
  std::string sector;
};

struct NewSession {
  std::string model_id;
  std::optional<int> model_version;
  OrgProfile org_profile;
  GatheringMode gathering_mode = GatheringMode::kIndividualSurvey;
  std::optional<std::string> session_id;  // generated as session-<n> when absent
};

enum class Transition { kOpenCollection, kCloseCollection, kFinalize };
Transition parse_transition(std::string_view s);

struct TransitionResult {
  AssessmentSession session;
  std::vector<std::string> warnings;
};

struct ImportResult {
  AssessmentSession session;
  std::size_t applied = 0;
  std::vector<CsvRejection> rejected;
};

// Application service over one data directory. Both the CLI and the HTTP API
// delegate every operation here. Mutations of one session are serialized and
// persisted before returning; distinct sessions proceed independently.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path data_dir, Clock clock = utc_now, StoreOptions options = {});

  Store& store() { return store_; }

  std::vector<ModelSummary> list_models() const;
  // Latest version when `version` is empty. Error(kUnknownModel) when absent.
  std::shared_ptr<const MaturityModel> model(const std::string& id, std::optional<int> version = {}) const;
  int latest_model_version(const std::string& id) const;
  // Validates (Error(kInvalidModel) carrying the first violation) and stores a
  // new version. Built-in ids are reserved.
  ModelRef import_model(const MaturityModel& model);

  AssessmentSession create_session(const NewSession& request);
  AssessmentSession load_session(const std::string& id) const;
  std::vector<SessionSummary> list_sessions() const;
  AssessmentSession clone_session(const std::string& id);

  AssessmentSession add_assessor(const std::string& id, const Assessor& assessor);
  TransitionResult transition(const std::string& id, Transition transition);
  AssessmentSession submit_responses(const std::string& id, std::span<const ResponseInput> batch);
  // Valid rows are applied as one batch; invalid rows come back with line numbers.
  ImportResult import_responses_csv(const std::string& id, std::string_view csv);
  AssessmentSession set_weights(const std::string& id, const WeightSet& weights);
  AssessmentSession record_consensus(const std::string& id, const ConsensusRecord& record);
  AssessmentSession adjust_overall(const std::string& id, double value, const std::string& rationale);
  AssessmentSession finalize(const std::string& id);

  // Moves a finalized session to reported on first generation.
  std::string report(const std::string& id, ReportFormat format);
  std::vector<ChartPoint> chart(const std::string& id) const;
  // Read-only scoring, optionally under hypothetical weights.
  ScoreSummary what_if(const std::string& id, const std::optional<WeightSet>& weights) const;

 private:
  template <typename Fn>
  AssessmentSession mutate(const std::string& id, Fn&& fn);
  std::mutex& session_mutex(const std::string& id);
  void persist(const AssessmentSession& session);

  Store store_;
  Clock clock_;
  mutable std::mutex models_mutex_;
  mutable std::map<std::pair<std::string, int>, std::shared_ptr<const MaturityModel>> model_cache_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> session_locks_;
  std::mutex create_mutex_;
};

}  // namespace align
