#include "fixtures.h"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <fmt/format.h>

#include "align/catalog.h"

namespace align::testing {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          fmt::format("align-test-{}-{}-{}", ::getpid(), counter++, rd());
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

const std::vector<CaseStudyRow>& case_study_rows() {
  static const double equal = 100.0 / 6.0;
  static const std::vector<CaseStudyRow> rows{
      {"customer-understanding", "customer-segmentation", "Segmentation of clients based on information analysis.", 4.2, 25},
      {"customer-understanding", "customer-sentiment-analysis", "Analysis of customer sentiments.", 2.2, 0},
      {"customer-understanding", "potential-client-behavior-analysis", "Analysis of the behavior and tastes of potential clients.", 2.8, 25},
      {"customer-understanding", "customer-base-management", "Management of current customer base with computer systems.", 3.8, 25},
      {"customer-understanding", "customer-information-integration", "Integration of information sources of current and prospective clients.", 3.3, 25},
      {"marketing-and-sales", "electronic-sales-channels", "Use of electronic sales channels.", 3.3, equal},
      {"marketing-and-sales", "electronic-marketing-channels", "Use of electronic marketing channels.", 4.0, equal},
      {"marketing-and-sales", "predictive-marketing", "Predictive marketing implementation", 2.7, equal},
      {"marketing-and-sales", "sales-process-digitization", "Digitization of sales operative processes towards clients.", 3.5, equal},
      {"marketing-and-sales", "sales-mobility", "Mobility in the sale process.", 3.7, equal},
      {"marketing-and-sales", "sales-process-visibility", "Visibility of sales processes to the client.", 2.8, equal},
      {"customer-service", "digital-service-channels", "Use of digital channels for customer service.", 4.0, equal},
      {"customer-service", "channel-coherence", "Coherence between the communication channels used with clients.", 2.8, equal},
      {"customer-service", "simple-agile-service-tools", "Implementation of simple and agile service tools.", 3.5, equal},
      {"customer-service", "service-channel-availability", "High availability of digital service channels.", 3.2, equal},
      {"customer-service", "self-service-tools", "Use of self-service tools of requirements.", 4.0, equal},
      {"customer-service", "service-feedback-channels", "Service experience feedback channels.", 2.5, equal},
  };
  return rows;
}

WeightSet case_study_weights() {
  WeightSet w;
  for (const auto& row : case_study_rows()) w.by_criterion[row.criterion_id][row.practice_id] = row.weight;
  return w;
}

OrgProfile case_study_profile() {
  return OrgProfile{"Technology and services", "50 to 200",
                    "Business unit selling business technology solutions to corporate clients across Latin America",
                    20000};
}

std::string build_case_study_session(Workspace& ws, bool with_gaps) {
  NewSession request;
  request.model_id = std::string(kCustomerAlignmentModelId);
  request.org_profile = case_study_profile();
  request.gathering_mode = GatheringMode::kIndividualSurvey;
  const auto id = ws.create_session(request).id();
  ws.add_assessor(id, {"it-lead", "IT lead", DomainRole::kIT});
  ws.add_assessor(id, {"sales-director", "Sales director", DomainRole::kBusiness});
  ws.transition(id, Transition::kOpenCollection);
  ws.transition(id, Transition::kCloseCollection);
  ws.set_weights(id, case_study_weights());
  for (const auto& row : case_study_rows()) {
    ConsensusRecord record{row.practice_id, row.level, {}, {}};
    if (with_gaps && std::string(row.practice_id) == "customer-base-management") {
      record.gaps.push_back({"CRM features available but only partly adopted", Severity::kMedium});
    }
    if (with_gaps && std::string(row.practice_id) == "self-service-tools") {
      record.gaps.push_back({"No self-service option for support requests", Severity::kHigh});
      record.actions.emplace_back("Pilot an assisted self-service portal");
    }
    ws.record_consensus(id, record);
  }
  ws.finalize(id);
  return id;
}

OracleScores brute_force(const RawSession& raw) {
  OracleScores out;
  double criterion_sum = 0.0;
  double criterion_lo = 5.0, criterion_hi = 1.0;
  for (const auto& c : raw.criteria) {
    double num = 0.0, den = 0.0;
    double lo = 5.0, hi = 1.0;
    for (const auto& p : c.practices) {
      double effective;
      if (p.consensus) {
        effective = *p.consensus;
      } else {
        long sum = 0;
        for (int level : p.levels) sum += level;
        effective = static_cast<double>(sum) / static_cast<double>(p.levels.size());
      }
      out.practice_effective.push_back(effective);
      if (p.weight > 0) {
        num += p.weight * effective;
        den += p.weight;
        lo = std::min(lo, effective);
        hi = std::max(hi, effective);
      }
    }
    const double score = std::min(std::max(num / den, lo), hi);
    out.criterion.push_back(score);
    criterion_sum += score;
    criterion_lo = std::min(criterion_lo, score);
    criterion_hi = std::max(criterion_hi, score);
  }
  out.overall = std::min(std::max(criterion_sum / static_cast<double>(raw.criteria.size()), criterion_lo),
                         criterion_hi);
  out.band_level = std::min(5, std::max(1, static_cast<int>(std::floor(out.overall))));
  out.above = out.overall > out.band_level;
  return out;
}

MaturityModel synthetic_model(std::size_t criteria, std::size_t practices_per_criterion) {
  MaturityModel m;
  m.id = "synthetic";
  m.name = "Synthetic rubric";
  for (int level = 1; level <= 5; ++level) {
    m.scale.push_back({level, fmt::format("Level {}", level), ""});
  }
  for (std::size_t i = 0; i < criteria; ++i) {
    Criterion c{fmt::format("c{}", i), fmt::format("Criterion {}", i), "", {}, {}};
    for (std::size_t k = 0; k < practices_per_criterion; ++k) {
      Practice p{fmt::format("c{}-p{}", i, k), fmt::format("Practice {}.{}", i, k), "", {}, {}};
      for (int level = 1; level <= 5; ++level) p.descriptors.push_back({level, fmt::format("state {}", level)});
      c.practices.push_back(std::move(p));
    }
    m.criteria.push_back(std::move(c));
  }
  return m;
}

RandomInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> criteria_count(1, 5);
  std::uniform_int_distribution<int> practice_count(1, 8);
  std::uniform_int_distribution<int> assessor_count(1, 10);
  std::uniform_int_distribution<int> level(1, 5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RandomInstance inst;
  inst.model = std::make_shared<MaturityModel>(synthetic_model(0, 0));
  const int n_criteria = criteria_count(rng);
  const int n_assessors = assessor_count(rng);
  for (int i = 0; i < n_criteria; ++i) {
    const auto n_practices = static_cast<std::size_t>(practice_count(rng));
    auto m = synthetic_model(1, n_practices);
    auto c = m.criteria.front();
    c.id = fmt::format("c{}", i);
    RawCriterion rc{c.id, {}};
    std::vector<double> weights;
    for (std::size_t k = 0; k < n_practices; ++k) {
      c.practices[k].id = fmt::format("c{}-p{}", i, k);
      RawPractice rp{c.practices[k].id, {}, std::nullopt, 0.0};
      // Some assessors skip a practice; every practice keeps one response.
      for (int a = 0; a < n_assessors; ++a) {
        if (rp.levels.empty() || unit(rng) > 0.2) rp.levels.push_back(level(rng));
      }
      if (unit(rng) < 0.25) rp.consensus = 1.0 + 4.0 * unit(rng);
      weights.push_back(unit(rng) < 0.2 ? 0.0 : unit(rng) * 10.0);
      rc.practices.push_back(std::move(rp));
    }
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; })) weights[0] = 1.0;
    double total = 0.0;
    for (double w : weights) total += w;
    for (std::size_t k = 0; k < n_practices; ++k) rc.practices[k].weight = weights[k] * 100.0 / total;
    inst.model->criteria.push_back(std::move(c));
    inst.raw.criteria.push_back(std::move(rc));
  }
  return inst;
}

ScoringInput RandomInstance::input() const {
  ScoringInput in;
  in.model = model.get();
  for (const auto& c : raw.criteria) {
    for (const auto& p : c.practices) {
      in.levels[p.id] = p.levels;
      if (p.consensus) in.consensus[p.id] = *p.consensus;
      in.weights.by_criterion[c.id][p.id] = p.weight;
    }
  }
  return in;
}

}  // namespace align::testing
