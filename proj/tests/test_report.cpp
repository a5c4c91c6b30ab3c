#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "align/catalog.h"
#include "align/error.h"
#include "align/report.h"
#include "fixtures.h"

using namespace align;
using namespace align::testing;
using nlohmann::json;

namespace {

std::shared_ptr<const MaturityModel> builtin_ptr() {
  static const auto ptr = std::make_shared<const MaturityModel>(builtin_model());
  return ptr;
}

AssessmentSession finalized(const std::vector<std::pair<std::string, double>>& overrides = {},
                            bool gaps = true, std::optional<double> adjust = std::nullopt) {
  const std::string at = kFixedTime;
  auto s = AssessmentSession::create(
      builtin_ptr(), {"r1", {std::string(kCustomerAlignmentModelId), 1}, case_study_profile(), GatheringMode::kJoint}, at);
  s.add_assessor({"it", "IT lead", DomainRole::kIT}, at);
  s.add_assessor({"biz", "Sales | director", DomainRole::kBusiness}, at);
  s.open_collection(at);
  s.close_collection(at);
  s.set_weights(case_study_weights(), at);
  for (const auto& row : case_study_rows()) {
    ConsensusRecord r{row.practice_id, row.level, {}, {}};
    for (const auto& [id, v] : overrides)
      if (id == row.practice_id) r.agreed_score = v;
    if (gaps && std::string(row.practice_id) == "service-feedback-channels") {
      r.gaps.push_back({"No channel for customers to rate support", Severity::kHigh});
      r.actions.emplace_back("Add a rating step when tickets close");
    }
    s.record_consensus(r, at);
  }
  if (adjust) s.adjust_overall(*adjust, "the team weighed service gaps more heavily", at);
  s.finalize(at);
  return s;
}

}  // namespace

TEST_CASE("report needs a finalized session") {
  auto s = AssessmentSession::create(
      builtin_ptr(), {"r0", {std::string(kCustomerAlignmentModelId), 1}, case_study_profile(), GatheringMode::kJoint},
      kFixedTime);
  try {
    build_report(s, kFixedTime);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kWrongPhase);
  }
  CHECK_THROWS_AS(chart_data(s), Error);
}

TEST_CASE("structured report content") {
  const auto s = finalized();
  const auto r = build_report(s, "2019-06-26T12:00:00Z");
  CHECK(r.at("session").at("id") == "r1");
  CHECK(r.at("org_profile").at("sector") == "Technology and services");
  CHECK(r.at("practices").size() == 17);
  CHECK(r.at("criteria").size() == 3);
  CHECK(r.at("criteria")[0].at("display") == "3.5");
  CHECK(r.at("criteria")[0].at("score").get<double>() == doctest::Approx(3.525));
  CHECK(r.at("criteria")[1].at("display") == "3.3");
  CHECK(r.at("criteria")[2].at("display") == "3.3");
  CHECK(r.at("overall").at("computed_display") == "3.4");
  CHECK(r.at("overall").at("adjusted").is_null());
  CHECK(r.at("overall").at("band").at("level") == 3);
  CHECK(r.at("overall").at("band").at("qualifier") == "above");
  CHECK(r.at("gaps").size() == 1);
  CHECK(r.at("gaps")[0].at("severity") == "high");
  CHECK(r.at("actions").size() == 1);
  CHECK(r.at("generated_at") == "2019-06-26T12:00:00Z");
  CHECK_FALSE(r.contains("phase"));
  CHECK(json::parse(render_structured(r)) == r);
}

TEST_CASE("every practice appears exactly once") {
  const auto r = build_report(finalized(), kFixedTime);
  std::set<std::string> ids;
  for (const auto& p : r.at("practices")) CHECK(ids.insert(p.at("practice_id").get<std::string>()).second);
  CHECK(ids.size() == builtin_model().practice_count());
  const auto weight = r.at("practices")[1];
  CHECK(weight.at("practice_id") == "customer-sentiment-analysis");
  CHECK(weight.at("weight_display") == "0");
  CHECK(r.at("practices")[5].at("weight_display") == "16.67");
}

TEST_CASE("markdown layout") {
  const auto md = render_markdown(build_report(finalized(), kFixedTime));
  CHECK(md.rfind("# Executive report: Business and IT alignment with customers\n", 0) == 0);
  CHECK(md.find("## Organization profile") != std::string::npos);
  CHECK(md.find("- Approximate number of customers: 20000") != std::string::npos);
  CHECK(md.find("- Sales \\| director (Business)") == std::string::npos);  // names are not table cells
  CHECK(md.find("- Sales | director (Business)") != std::string::npos);
  CHECK(md.find("| Criterion | Practice | Average level | Weighting in % | Average by criterion |") !=
        std::string::npos);
  CHECK(md.find("| Customer understanding | Customer segmentation based on information analysis | 4.2 | 25% | 3.5 |") !=
        std::string::npos);
  CHECK(md.find("|  | Customer sentiments analysis | 2.2 | 0% |  |") != std::string::npos);
  CHECK(md.find("| Marketing and sales process | Use of electronic sales channels | 3.3 | 16.67% | 3.3 |") !=
        std::string::npos);
  CHECK(md.find("General level: 3.4\n") != std::string::npos);
  CHECK(md.find("Maturity band: 3.4, above level 3 (Focused and stabilized process).") != std::string::npos);
  CHECK(md.find("### Customer service\n\n- Service experience feedback channels [high]: No channel for customers to "
                "rate support") != std::string::npos);
  CHECK(md.find("- Service experience feedback channels: Add a rating step when tickets close") != std::string::npos);
}

TEST_CASE("markdown without gaps or actions") {
  const auto md = render_markdown(build_report(finalized({}, false), kFixedTime));
  CHECK(md.find("No gaps recorded.") != std::string::npos);
  CHECK(md.find("No improvement actions recorded.") != std::string::npos);
}

TEST_CASE("adjusted general level is shown with its rationale") {
  const auto s = finalized({}, true, 3.0);
  const auto r = build_report(s, kFixedTime);
  CHECK(r.at("overall").at("effective_display") == "3.0");
  CHECK(r.at("overall").at("computed_display") == "3.4");
  CHECK(r.at("overall").at("band").at("qualifier") == "at");
  const auto md = render_markdown(r);
  CHECK(md.find("General level: 3.0\n") != std::string::npos);
  CHECK(md.find("from the computed 3.4. Rationale: the team weighed service gaps more heavily") != std::string::npos);
  CHECK(md.find("Maturity band: 3.0, at level 3") != std::string::npos);
}

TEST_CASE("generation is pure apart from the timestamp") {
  const auto s = finalized();
  const auto before = s.to_json();
  const auto a = generate_report(s, ReportFormat::kHumanReadable, kFixedTime);
  const auto b = generate_report(s, ReportFormat::kHumanReadable, kFixedTime);
  CHECK(a == b);
  auto ja = build_report(s, "2019-01-01T00:00:00Z");
  auto jb = build_report(s, "2024-01-01T00:00:00Z");
  CHECK(ja != jb);
  ja.erase("generated_at");
  jb.erase("generated_at");
  CHECK(ja == jb);
  CHECK(s.to_json() == before);
}

TEST_CASE("property: totals re-derivable from report rows") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> score(1.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::pair<std::string, double>> overrides;
    for (const auto& row : case_study_rows()) overrides.emplace_back(row.practice_id, std::round(score(rng) * 10) / 10);
    const auto r = build_report(finalized(overrides, false), kFixedTime);
    double overall = 0.0;
    for (const auto& c : r.at("criteria")) {
      double num = 0.0, den = 0.0;
      for (const auto& p : r.at("practices")) {
        if (p.at("criterion_id") != c.at("criterion_id")) continue;
        const double w = p.at("weight_percent").get<double>();
        num += w * p.at("effective_score").get<double>();
        den += w;
        REQUIRE(p.at("effective_display") == display_score(p.at("effective_score").get<double>()));
      }
      REQUIRE(std::abs(num / den - c.at("score").get<double>()) <= 1e-9);
      REQUIRE(display_score(num / den) == c.at("display"));
      overall += num / den;
    }
    overall /= 3.0;
    REQUIRE(display_score(overall) == r.at("overall").at("computed_display"));
  }
}

TEST_CASE("chart data") {
  const auto points = chart_data(finalized());
  REQUIRE(points.size() == 4);
  CHECK(points[0] == ChartPoint{"customer-understanding", "Customer understanding", points[0].value});
  CHECK(points[0].value == doctest::Approx(3.525));
  CHECK(points[3].label == "General level");
  CHECK(points[3].value == doctest::Approx(3.3972).epsilon(1e-4));
  CHECK(json(points[1]).at("id") == "marketing-and-sales");
}

TEST_CASE("what-if document") {
  const auto s = finalized();
  const auto weights = default_weights(builtin_model());
  const auto summary = score_session(s.scoring_input(&weights));
  const auto doc = what_if_document(s, summary, weights);
  CHECK(doc.at("session_id") == "r1");
  CHECK(doc.at("criteria")[0].at("score").get<double>() == doctest::Approx(3.26));
  CHECK(doc.at("overall").at("display") == display_score(summary.overall.effective()));
  CHECK(doc.at("weights").get<WeightSet>() == weights);
}

TEST_CASE("format names") {
  CHECK(parse_report_format("md") == ReportFormat::kHumanReadable);
  CHECK(parse_report_format("markdown") == ReportFormat::kHumanReadable);
  CHECK(parse_report_format("json") == ReportFormat::kStructured);
  CHECK(parse_report_format("structured") == ReportFormat::kStructured);
  CHECK_THROWS_AS(parse_report_format("pdf"), Error);
}
