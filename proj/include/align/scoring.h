#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "align/rubric.h"

namespace align {

// Allowed deviation of a criterion's weight total from 100%.
inline constexpr double kWeightSumTolerance = 0.5;

// practice id -> weight in percent. Zero excludes the practice.
using PracticeWeights = std::map<std::string, double>;

struct WeightSet {
  std::map<std::string, PracticeWeights> by_criterion;

  bool operator==(const WeightSet&) const = default;
};

struct PracticeScore {
  std::string practice_id;
  std::vector<int> individual_levels;
  std::optional<double> average;    // absent when nobody answered
  std::optional<double> consensus;  // overrides average when present

  // Throws Error(kUnscorablePractice) when neither value exists.
  double effective() const;

  bool operator==(const PracticeScore&) const = default;
};

struct Contribution {
  std::string practice_id;
  double weight = 0.0;
  double score = 0.0;

  bool operator==(const Contribution&) const = default;
};

struct CriterionScore {
  std::string criterion_id;
  double score = 0.0;
  std::vector<Contribution> contributing;

  bool operator==(const CriterionScore&) const = default;
};

struct OverallScore {
  double computed = 0.0;
  std::optional<double> adjusted;
  std::string adjustment_rationale;

  double effective() const { return adjusted.value_or(computed); }

  bool operator==(const OverallScore&) const = default;
};

enum class BandQualifier { kAt, kAbove };

struct MaturityBand {
  int level = kMinLevel;
  std::string label;
  BandQualifier qualifier = BandQualifier::kAt;

  bool operator==(const MaturityBand&) const = default;
};

std::string_view to_string(BandQualifier q);

// Everything score_session needs, detached from the session workflow.
struct ScoringInput {
  const MaturityModel* model = nullptr;
  std::map<std::string, std::vector<int>> levels;  // practice id -> submitted levels
  std::map<std::string, double> consensus;         // practice id -> agreed score
  WeightSet weights;
  std::optional<std::pair<double, std::string>> overall_adjustment;
};

struct ScoreSummary {
  std::vector<PracticeScore> practices;  // model order
  std::vector<CriterionScore> criteria;  // model order
  OverallScore overall;
  MaturityBand band;  // classifies overall.effective()

  bool operator==(const ScoreSummary&) const = default;
};

double practice_average(std::span<const int> levels);

// Weighted mean sum(w*s)/sum(w) over positive weights. `weights` must name
// exactly the practices in `practices`; the 100% total is not enforced here.
CriterionScore criterion_score(const std::string& criterion_id,
                               std::span<const PracticeScore> practices,
                               const PracticeWeights& weights);

OverallScore overall_score(std::span<const CriterionScore> criteria);

OverallScore apply_overall_adjustment(OverallScore overall, double adjusted,
                                      std::string rationale);

MaturityBand classify_band(double score, std::span<const LevelDefinition> scale);

// Equal weights of exactly 100/n per criterion.
WeightSet default_weights(const MaturityModel& model);

// Throws Error(kInvalidWeights) or Error(kUnknownCriterion/kUnknownPractice)
// naming the offending criterion or practice.
void validate_weights(const MaturityModel& model, const WeightSet& weights);

ScoreSummary score_session(const ScoringInput& input);

// One-decimal, half-up rendering used by every report ("3.525" -> "3.5").
double round_half_up_1(double value);
std::string display_score(double value);
// Percent rendering with at most two decimals ("16.67", "25", "0").
std::string display_weight(double percent);

void to_json(nlohmann::json& j, const WeightSet& v);
void from_json(const nlohmann::json& j, WeightSet& v);
void to_json(nlohmann::json& j, const PracticeScore& v);
void from_json(const nlohmann::json& j, PracticeScore& v);
void to_json(nlohmann::json& j, const Contribution& v);
void from_json(const nlohmann::json& j, Contribution& v);
void to_json(nlohmann::json& j, const CriterionScore& v);
void from_json(const nlohmann::json& j, CriterionScore& v);
void to_json(nlohmann::json& j, const OverallScore& v);
void from_json(const nlohmann::json& j, OverallScore& v);
void to_json(nlohmann::json& j, const MaturityBand& v);
void from_json(const nlohmann::json& j, MaturityBand& v);
void to_json(nlohmann::json& j, const ScoreSummary& v);
void from_json(const nlohmann::json& j, ScoreSummary& v);

}  // namespace align
