#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "align/rubric.h"
#include "align/scoring.h"

namespace align {

enum class Phase { kCreated, kCollecting, kConsensus, kFinalized, kReported };
enum class GatheringMode { kJoint, kIndividualSurvey, kCombined };
enum class DomainRole { kIT, kBusiness };
enum class Severity { kLow, kMedium, kHigh };

std::string_view to_string(Phase v);
std::string_view to_string(GatheringMode v);
std::string_view to_string(DomainRole v);
std::string_view to_string(Severity v);
// Parsers throw Error(kInvalidArgument) on unknown names.
Phase parse_phase(std::string_view s);
GatheringMode parse_gathering_mode(std::string_view s);
DomainRole parse_domain_role(std::string_view s);
Severity parse_severity(std::string_view s);

struct ModelRef {
  std::string id;
  int version = 1;

  bool operator==(const ModelRef&) const = default;
};

struct OrgProfile {
  std::string sector;
  std::string employee_band;
  std::string activity_description;
  std::int64_t approx_customer_count = 0;

  bool operator==(const OrgProfile&) const = default;
};

struct Assessor {
  std::string id;
  std::string display_name;
  DomainRole domain_role = DomainRole::kBusiness;

  bool operator==(const Assessor&) const = default;
};

// How a response reached the session: an individual survey during
// collection, or live during the joint consensus meeting.
enum class ResponseChannel { kSurvey, kJoint };

struct ResponseInput {
  std::string assessor_id;
  std::string practice_id;
  int level = 0;
  std::optional<std::string> comment;

  bool operator==(const ResponseInput&) const = default;
};

struct IndividualResponse {
  std::string assessor_id;
  std::string practice_id;
  int level = 0;
  std::optional<std::string> comment;
  std::string submitted_at;
  ResponseChannel channel = ResponseChannel::kSurvey;

  bool operator==(const IndividualResponse&) const = default;
};

struct GapNote {
  std::string description;
  Severity severity = Severity::kMedium;

  bool operator==(const GapNote&) const = default;
};

struct ConsensusRecord {
  std::string practice_id;
  double agreed_score = 0.0;
  std::vector<GapNote> gaps;
  std::vector<std::string> actions;

  bool operator==(const ConsensusRecord&) const = default;
};

struct OverallAdjustment {
  double value = 0.0;
  std::string rationale;

  bool operator==(const OverallAdjustment&) const = default;
};

struct AuditEvent {
  std::uint64_t seq = 0;  // insertion order; authoritative over `at`
  std::string at;         // UTC, ISO 8601
  std::string type;
  nlohmann::json data;

  bool operator==(const AuditEvent&) const = default;
};

struct CreateRequest {
  std::string session_id;
  ModelRef model_ref;
  OrgProfile org_profile;
  GatheringMode gathering_mode = GatheringMode::kIndividualSurvey;
};

// One evaluation of one organization against one rubric. Every mutation
// validates, then appends exactly one audit event and applies it; replaying
// the log through apply reconstructs the session. Not thread-safe; callers
// serialize mutations per session.
class AssessmentSession {
 public:
  // Throws Error(kInvalidModel) when the model does not validate.
  static AssessmentSession create(std::shared_ptr<const MaturityModel> model,
                                  const CreateRequest& request, const std::string& at);

  // A fresh session in the consensus phase carrying over the source's
  // assessors, responses, weights, consensus records and adjustment.
  static AssessmentSession clone_from(const AssessmentSession& source, std::string new_id,
                                      const std::string& at);

  static AssessmentSession replay(std::shared_ptr<const MaturityModel> model,
                                  std::span<const AuditEvent> log);

  static AssessmentSession from_json(const nlohmann::json& j,
                                     std::shared_ptr<const MaturityModel> model);
  nlohmann::json to_json() const;

  void add_assessor(const Assessor& assessor, const std::string& at);
  void open_collection(const std::string& at);
  // All-or-nothing. Resubmission of an (assessor, practice) pair replaces the
  // effective response; the prior value stays in the audit log.
  void submit_responses(std::span<const ResponseInput> batch, const std::string& at);
  // Validates one response against phase, assessors and model without applying it.
  void check_response(const ResponseInput& response) const;
  // Requires at least one assessor; returns non-blocking team warnings.
  std::vector<std::string> close_collection(const std::string& at);
  void set_weights(const WeightSet& weights, const std::string& at);
  void record_consensus(const ConsensusRecord& record, const std::string& at);
  void adjust_overall(double value, const std::string& rationale, const std::string& at);
  void finalize(const std::string& at);
  // finalized -> reported. Returns false (and does nothing) when already reported.
  bool mark_reported(std::string_view format, const std::string& at);

  // Team-composition warnings for the current assessor list.
  std::vector<std::string> team_warnings() const;

  // Scoring input for the current state, optionally with hypothetical weights.
  ScoringInput scoring_input(const WeightSet* weights_override = nullptr) const;

  const std::string& id() const { return id_; }
  const ModelRef& model_ref() const { return model_ref_; }
  const MaturityModel& model() const { return *model_; }
  std::shared_ptr<const MaturityModel> model_ptr() const { return model_; }
  const OrgProfile& org_profile() const { return org_profile_; }
  GatheringMode gathering_mode() const { return gathering_mode_; }
  Phase phase() const { return phase_; }
  const std::vector<Assessor>& assessors() const { return assessors_; }
  const std::vector<IndividualResponse>& responses() const { return responses_; }
  const WeightSet& weights() const { return weights_; }
  const std::vector<ConsensusRecord>& consensus_records() const { return consensus_; }
  const std::optional<OverallAdjustment>& overall_adjustment() const { return adjustment_; }
  // Frozen at finalize.
  const std::optional<ScoreSummary>& scores() const { return scores_; }
  const std::optional<std::string>& cloned_from() const { return cloned_from_; }
  const std::vector<AuditEvent>& audit_log() const { return audit_; }

  const IndividualResponse* find_response(std::string_view assessor_id,
                                          std::string_view practice_id) const;
  const ConsensusRecord* find_consensus(std::string_view practice_id) const;

  bool operator==(const AssessmentSession& other) const { return to_json() == other.to_json(); }

 private:
  explicit AssessmentSession(std::shared_ptr<const MaturityModel> model) : model_(std::move(model)) {}

  void append(std::string type, nlohmann::json data, const std::string& at);
  void apply(const AuditEvent& event);
  void require_phase(std::initializer_list<Phase> allowed, std::string_view op) const;
  bool accepts_responses() const;

  std::shared_ptr<const MaturityModel> model_;
  std::string id_;
  ModelRef model_ref_;
  OrgProfile org_profile_;
  GatheringMode gathering_mode_ = GatheringMode::kIndividualSurvey;
  Phase phase_ = Phase::kCreated;
  std::vector<Assessor> assessors_;
  std::vector<IndividualResponse> responses_;
  WeightSet weights_;
  std::vector<ConsensusRecord> consensus_;
  std::optional<OverallAdjustment> adjustment_;
  std::optional<ScoreSummary> scores_;
  std::optional<std::string> cloned_from_;
  std::vector<AuditEvent> audit_;
};

void to_json(nlohmann::json& j, const ModelRef& v);
void from_json(const nlohmann::json& j, ModelRef& v);
void to_json(nlohmann::json& j, const OrgProfile& v);
void from_json(const nlohmann::json& j, OrgProfile& v);
void to_json(nlohmann::json& j, const Assessor& v);
void from_json(const nlohmann::json& j, Assessor& v);
void to_json(nlohmann::json& j, const ResponseInput& v);
void from_json(const nlohmann::json& j, ResponseInput& v);
void to_json(nlohmann::json& j, const IndividualResponse& v);
void from_json(const nlohmann::json& j, IndividualResponse& v);
void to_json(nlohmann::json& j, const GapNote& v);
void from_json(const nlohmann::json& j, GapNote& v);
void to_json(nlohmann::json& j, const ConsensusRecord& v);
void from_json(const nlohmann::json& j, ConsensusRecord& v);
void to_json(nlohmann::json& j, const AuditEvent& v);
void from_json(const nlohmann::json& j, AuditEvent& v);

// Bulk response import (CSV with header assessor_id,practice_id,level,comment).
struct CsvRow {
  std::size_t line = 0;  // 1-based line in the source text
  ResponseInput response;
};

struct CsvRejection {
  std::size_t line = 0;
  std::string code;
  std::string message;

  bool operator==(const CsvRejection&) const = default;
};

struct CsvParseResult {
  std::vector<CsvRow> rows;
  std::vector<CsvRejection> rejected;
};

// Throws Error(kInvalidArgument) when the header is missing or wrong;
// malformed data rows are returned as rejections.
CsvParseResult parse_responses_csv(std::string_view text);

}  // namespace align
