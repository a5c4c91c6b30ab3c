#include "align/scoring.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "align/error.h"

namespace align {

namespace {

bool in_scale(double v) { return std::isfinite(v) && v >= kMinLevel && v <= kMaxLevel; }

}  // namespace

std::string_view to_string(BandQualifier q) { return q == BandQualifier::kAbove ? "above" : "at"; }

double PracticeScore::effective() const {
  if (consensus) return *consensus;
  if (average) return *average;
  throw Error(ErrorCode::kUnscorablePractice,
              fmt::format("practice {} has no responses and no consensus score", practice_id),
              practice_id);
}

double practice_average(std::span<const int> levels) {
  if (levels.empty()) throw Error(ErrorCode::kEmptyInput, "no levels to average");
  long sum = 0;
  for (int level : levels) {
    if (level < kMinLevel || level > kMaxLevel) {
      throw Error(ErrorCode::kLevelOutOfRange,
                  fmt::format("level {} outside {}..{}", level, kMinLevel, kMaxLevel), "level");
    }
    sum += level;
  }
  return static_cast<double>(sum) / static_cast<double>(levels.size());
}

CriterionScore criterion_score(const std::string& criterion_id,
                               std::span<const PracticeScore> practices,
                               const PracticeWeights& weights) {
  if (practices.empty()) {
    throw Error(ErrorCode::kEmptyInput, fmt::format("criterion {} has no practices", criterion_id),
                criterion_id);
  }
  for (const auto& [practice_id, w] : weights) {
    const bool known = std::any_of(practices.begin(), practices.end(),
                                   [&](const PracticeScore& p) { return p.practice_id == practice_id; });
    if (!known) {
      throw Error(ErrorCode::kUnknownPractice,
                  fmt::format("weights for criterion {} name unknown practice {}", criterion_id,
                              practice_id),
                  practice_id);
    }
  }

  CriterionScore out{criterion_id, 0.0, {}};
  double weighted_sum = 0.0;
  double weight_total = 0.0;
  double lo = kMaxLevel;
  double hi = kMinLevel;
  for (const auto& p : practices) {
    const auto it = weights.find(p.practice_id);
    if (it == weights.end()) {
      throw Error(ErrorCode::kInvalidWeights,
                  fmt::format("practice {} has no weight", p.practice_id), p.practice_id);
    }
    const double w = it->second;
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::kInvalidWeights,
                  fmt::format("practice {} has invalid weight {}", p.practice_id, w), p.practice_id);
    }
    const double s = p.effective();
    out.contributing.push_back({p.practice_id, w, s});
    if (w > 0.0) {
      weighted_sum += w * s;
      weight_total += w;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  if (weight_total <= 0.0) {
    throw Error(ErrorCode::kAllWeightsZero,
                fmt::format("every practice of criterion {} has zero weight", criterion_id),
                criterion_id);
  }
  // The exact weighted mean lies in [lo, hi]; clamping removes rounding overshoot.
  out.score = std::clamp(weighted_sum / weight_total, lo, hi);
  return out;
}

OverallScore overall_score(std::span<const CriterionScore> criteria) {
  if (criteria.empty()) throw Error(ErrorCode::kEmptyInput, "no criterion scores to combine");
  double sum = 0.0;
  double lo = kMaxLevel;
  double hi = kMinLevel;
  for (const auto& c : criteria) {
    sum += c.score;
    lo = std::min(lo, c.score);
    hi = std::max(hi, c.score);
  }
  return OverallScore{std::clamp(sum / static_cast<double>(criteria.size()), lo, hi), std::nullopt, {}};
}

OverallScore apply_overall_adjustment(OverallScore overall, double adjusted, std::string rationale) {
  if (!in_scale(adjusted)) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("adjusted score {} outside [{}, {}]", adjusted, kMinLevel, kMaxLevel),
                "adjusted");
  }
  if (rationale.empty()) {
    throw Error(ErrorCode::kEmptyRationale, "an overall adjustment needs a rationale", "rationale");
  }
  overall.adjusted = adjusted;
  overall.adjustment_rationale = std::move(rationale);
  return overall;
}

MaturityBand classify_band(double score, std::span<const LevelDefinition> scale) {
  if (!in_scale(score)) {
    throw Error(ErrorCode::kOutOfRange,
                fmt::format("score {} outside [{}, {}]", score, kMinLevel, kMaxLevel), "score");
  }
  const int level = std::clamp(static_cast<int>(std::floor(score)), kMinLevel, kMaxLevel);
  MaturityBand band;
  band.level = level;
  band.qualifier = score > level ? BandQualifier::kAbove : BandQualifier::kAt;
  for (const auto& def : scale)
    if (def.level == level) band.label = def.label;
  return band;
}

WeightSet default_weights(const MaturityModel& model) {
  WeightSet out;
  for (const auto& c : model.criteria) {
    auto& entry = out.by_criterion[c.id];
    const double each = 100.0 / static_cast<double>(c.practices.size());
    for (const auto& p : c.practices) entry[p.id] = each;
  }
  return out;
}

void validate_weights(const MaturityModel& model, const WeightSet& weights) {
  for (const auto& [criterion_id, entry] : weights.by_criterion) {
    if (find_criterion(model, criterion_id) == nullptr) {
      throw Error(ErrorCode::kUnknownCriterion,
                  fmt::format("weights name unknown criterion {}", criterion_id), criterion_id);
    }
  }
  for (const auto& c : model.criteria) {
    const auto found = weights.by_criterion.find(c.id);
    if (found == weights.by_criterion.end()) {
      throw Error(ErrorCode::kInvalidWeights, fmt::format("criterion {} has no weights", c.id), c.id);
    }
    const auto& entry = found->second;
    std::set<std::string> ids;
    for (const auto& p : c.practices) ids.insert(p.id);
    for (const auto& [practice_id, w] : entry) {
      if (!ids.contains(practice_id)) {
        throw Error(ErrorCode::kUnknownPractice,
                    fmt::format("weights for criterion {} name unknown practice {}", c.id,
                                practice_id),
                    fmt::format("{}.{}", c.id, practice_id));
      }
    }
    double total = 0.0;
    bool any_positive = false;
    for (const auto& p : c.practices) {
      const auto it = entry.find(p.id);
      if (it == entry.end()) {
        throw Error(ErrorCode::kInvalidWeights, fmt::format("practice {} has no weight", p.id),
                    fmt::format("{}.{}", c.id, p.id));
      }
      if (!std::isfinite(it->second) || it->second < 0.0) {
        throw Error(ErrorCode::kInvalidWeights,
                    fmt::format("practice {} has negative or non-finite weight", p.id),
                    fmt::format("{}.{}", c.id, p.id));
      }
      total += it->second;
      any_positive = any_positive || it->second > 0.0;
    }
    if (!any_positive) {
      throw Error(ErrorCode::kInvalidWeights,
                  fmt::format("every practice of criterion {} has zero weight", c.id), c.id);
    }
    if (std::abs(total - 100.0) > kWeightSumTolerance) {
      throw Error(ErrorCode::kInvalidWeights,
                  fmt::format("weights of criterion {} sum to {}, expected 100 +/- {}", c.id,
                              display_weight(total), kWeightSumTolerance),
                  c.id);
    }
  }
}

ScoreSummary score_session(const ScoringInput& input) {
  if (input.model == nullptr) throw Error(ErrorCode::kInternal, "scoring input has no model");
  const auto& model = *input.model;
  for (const auto& [practice_id, levels] : input.levels) {
    if (find_practice(model, practice_id) == nullptr) {
      throw Error(ErrorCode::kUnknownPractice, fmt::format("unknown practice: {}", practice_id),
                  practice_id);
    }
  }
  for (const auto& [practice_id, value] : input.consensus) {
    if (find_practice(model, practice_id) == nullptr) {
      throw Error(ErrorCode::kUnknownPractice, fmt::format("unknown practice: {}", practice_id),
                  practice_id);
    }
    if (!in_scale(value)) {
      throw Error(ErrorCode::kScoreOutOfRange,
                  fmt::format("consensus score {} for {} outside [1, 5]", value, practice_id),
                  practice_id);
    }
  }
  validate_weights(model, input.weights);

  ScoreSummary out;
  for (const auto& c : model.criteria) {
    std::vector<PracticeScore> rows;
    for (const auto& p : c.practices) {
      PracticeScore row{p.id, {}, std::nullopt, std::nullopt};
      if (const auto it = input.levels.find(p.id); it != input.levels.end() && !it->second.empty()) {
        row.individual_levels = it->second;
        try {
          row.average = practice_average(it->second);
        } catch (const Error& e) {
          throw Error(e.code(), fmt::format("practice {}: {}", p.id, e.what()), p.id);
        }
      }
      if (const auto it = input.consensus.find(p.id); it != input.consensus.end()) {
        row.consensus = it->second;
      }
      if (!row.average && !row.consensus) {
        throw Error(ErrorCode::kUnscorablePractice,
                    fmt::format("practice {} has no responses and no consensus score", p.id), p.id);
      }
      rows.push_back(std::move(row));
    }
    out.criteria.push_back(criterion_score(c.id, rows, input.weights.by_criterion.at(c.id)));
    for (auto& row : rows) out.practices.push_back(std::move(row));
  }
  out.overall = overall_score(out.criteria);
  if (input.overall_adjustment) {
    out.overall = apply_overall_adjustment(out.overall, input.overall_adjustment->first,
                                           input.overall_adjustment->second);
  }
  out.band = classify_band(out.overall.effective(), model.scale);
  return out;
}

double round_half_up_1(double value) {
  // The epsilon keeps binary representation error (3.35 -> 3.3499...) from
  // turning a decimal half into a round-down.
  return std::floor(value * 10.0 + 0.5 + 1e-9) / 10.0;
}

std::string display_score(double value) { return fmt::format("{:.1f}", round_half_up_1(value)); }

std::string display_weight(double percent) {
  auto s = fmt::format("{:.2f}", percent);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

void to_json(nlohmann::json& j, const WeightSet& v) { j = v.by_criterion; }
void from_json(const nlohmann::json& j, WeightSet& v) {
  v.by_criterion = j.get<std::map<std::string, PracticeWeights>>();
}

void to_json(nlohmann::json& j, const PracticeScore& v) {
  j = {{"practice_id", v.practice_id}, {"individual_levels", v.individual_levels}};
  j["average"] = v.average ? nlohmann::json(*v.average) : nlohmann::json(nullptr);
  j["consensus"] = v.consensus ? nlohmann::json(*v.consensus) : nlohmann::json(nullptr);
}
void from_json(const nlohmann::json& j, PracticeScore& v) {
  j.at("practice_id").get_to(v.practice_id);
  j.at("individual_levels").get_to(v.individual_levels);
  v.average = j.at("average").is_null() ? std::nullopt : std::optional(j.at("average").get<double>());
  v.consensus =
      j.at("consensus").is_null() ? std::nullopt : std::optional(j.at("consensus").get<double>());
}

void to_json(nlohmann::json& j, const Contribution& v) {
  j = {{"practice_id", v.practice_id}, {"weight", v.weight}, {"score", v.score}};
}
void from_json(const nlohmann::json& j, Contribution& v) {
  j.at("practice_id").get_to(v.practice_id);
  j.at("weight").get_to(v.weight);
  j.at("score").get_to(v.score);
}

void to_json(nlohmann::json& j, const CriterionScore& v) {
  j = {{"criterion_id", v.criterion_id}, {"score", v.score}, {"contributing", v.contributing}};
}
void from_json(const nlohmann::json& j, CriterionScore& v) {
  j.at("criterion_id").get_to(v.criterion_id);
  j.at("score").get_to(v.score);
  j.at("contributing").get_to(v.contributing);
}

void to_json(nlohmann::json& j, const OverallScore& v) {
  j = {{"computed", v.computed}};
  j["adjusted"] = v.adjusted ? nlohmann::json(*v.adjusted) : nlohmann::json(nullptr);
  j["adjustment_rationale"] = v.adjustment_rationale;
}
void from_json(const nlohmann::json& j, OverallScore& v) {
  j.at("computed").get_to(v.computed);
  v.adjusted = j.at("adjusted").is_null() ? std::nullopt : std::optional(j.at("adjusted").get<double>());
  j.at("adjustment_rationale").get_to(v.adjustment_rationale);
}

void to_json(nlohmann::json& j, const MaturityBand& v) {
  j = {{"level", v.level}, {"label", v.label}, {"qualifier", std::string(to_string(v.qualifier))}};
}
void from_json(const nlohmann::json& j, MaturityBand& v) {
  j.at("level").get_to(v.level);
  j.at("label").get_to(v.label);
  v.qualifier = j.at("qualifier").get<std::string>() == "above" ? BandQualifier::kAbove
                                                                 : BandQualifier::kAt;
}

void to_json(nlohmann::json& j, const ScoreSummary& v) {
  j = {{"practices", v.practices}, {"criteria", v.criteria}, {"overall", v.overall}, {"band", v.band}};
}
void from_json(const nlohmann::json& j, ScoreSummary& v) {
  j.at("practices").get_to(v.practices);
  j.at("criteria").get_to(v.criteria);
  j.at("overall").get_to(v.overall);
  j.at("band").get_to(v.band);
}

}  // namespace align
