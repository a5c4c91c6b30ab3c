#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "align/rubric.h"
#include "align/scoring.h"
#include "align/session.h"
#include "align/workspace.h"

namespace align::testing {

inline constexpr const char* kFixedTime = "2019-06-26T12:00:00Z";

inline Clock fixed_clock(std::string value = kFixedTime) {
  return [value = std::move(value)] { return value; };
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Consolidated case-study results: per practice the team's agreed level and
// the weight in percent. Equal weights are stored as 100/6.
struct CaseStudyRow {
  const char* criterion_id;
  const char* practice_id;
  const char* published_name;  // as printed in the results table
  double level;
  double weight;
};
const std::vector<CaseStudyRow>& case_study_rows();
WeightSet case_study_weights();
OrgProfile case_study_profile();

// Runs create -> assessors -> collection -> weights -> 17 consensus values
// (with gap notes) -> finalize. Returns the session id.
std::string build_case_study_session(Workspace& ws, bool with_gaps = true);

// --- independent oracle -------------------------------------------------------
// Works on plain nested vectors, never on the engine's types, and recomputes
// every figure from raw responses.
struct RawPractice {
  std::string id;
  std::vector<int> levels;
  std::optional<double> consensus;
  double weight = 0.0;
};
struct RawCriterion {
  std::string id;
  std::vector<RawPractice> practices;
};
struct RawSession {
  std::vector<RawCriterion> criteria;
};
struct OracleScores {
  std::vector<double> practice_effective;
  std::vector<double> criterion;
  double overall = 0.0;
  int band_level = 0;
  bool above = false;
};
OracleScores brute_force(const RawSession& raw);

// Synthetic rubric + inputs for property tests.
struct RandomInstance {
  std::shared_ptr<MaturityModel> model;
  RawSession raw;
  ScoringInput input() const;
};
// Up to 5 criteria, 8 practices per criterion and 10 assessors. Weights per
// criterion total exactly 100 after normalization, with some zeros.
RandomInstance random_instance(std::mt19937_64& rng);

MaturityModel synthetic_model(std::size_t criteria, std::size_t practices_per_criterion);

}  // namespace align::testing
