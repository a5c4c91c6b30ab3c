#include "align/report.h"

#include <sstream>

#include <fmt/format.h>

#include "align/error.h"

namespace align {

namespace {

using nlohmann::json;

const ScoreSummary& frozen_scores(const AssessmentSession& session) {
  if (session.phase() != Phase::kFinalized && session.phase() != Phase::kReported) {
    throw Error(ErrorCode::kWrongPhase,
                fmt::format("session {} is {}; reports need a finalized session", session.id(),
                            to_string(session.phase())),
                "phase");
  }
  if (!session.scores()) {
    throw Error(ErrorCode::kInternal, fmt::format("session {} has no frozen scores", session.id()));
  }
  return *session.scores();
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string band_statement(const MaturityBand& band) {
  return fmt::format("{} level {} ({})", to_string(band.qualifier), band.level, band.label);
}

std::string cell(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "structured" || s == "json") return ReportFormat::kStructured;
  if (s == "markdown" || s == "md" || s == "human-readable") return ReportFormat::kHumanReadable;
  throw Error(ErrorCode::kInvalidArgument,
              fmt::format("unknown report format: {} (expected structured|json or markdown|md)", s),
              "format");
}

std::string_view to_string(ReportFormat f) {
  return f == ReportFormat::kStructured ? "structured" : "markdown";
}

json build_report(const AssessmentSession& session, const std::string& generated_at) {
  const auto& scores = frozen_scores(session);
  const auto& model = session.model();

  json practices = json::array();
  json criteria = json::array();
  json gaps = json::array();
  json actions = json::array();

  for (const auto& cs : scores.criteria) {
    const auto* criterion = find_criterion(model, cs.criterion_id);
    double weight_total = 0.0;
    for (const auto& contribution : cs.contributing) {
      const auto* practice = find_practice(model, contribution.practice_id);
      const PracticeScore* ps = nullptr;
      for (const auto& p : scores.practices)
        if (p.practice_id == contribution.practice_id) ps = &p;
      weight_total += contribution.weight;
      practices.push_back({{"criterion_id", cs.criterion_id},
                           {"practice_id", contribution.practice_id},
                           {"name", practice->name},
                           {"responses", ps ? ps->individual_levels.size() : 0},
                           {"average", ps ? nullable(ps->average) : json(nullptr)},
                           {"consensus", ps ? nullable(ps->consensus) : json(nullptr)},
                           {"effective_score", contribution.score},
                           {"effective_display", display_score(contribution.score)},
                           {"weight_percent", contribution.weight},
                           {"weight_display", display_weight(contribution.weight)}});
      if (const auto* record = session.find_consensus(contribution.practice_id)) {
        for (const auto& gap : record->gaps) {
          gaps.push_back({{"criterion_id", cs.criterion_id},
                          {"practice_id", contribution.practice_id},
                          {"practice_name", practice->name},
                          {"description", gap.description},
                          {"severity", std::string(to_string(gap.severity))}});
        }
        for (const auto& action : record->actions) {
          actions.push_back({{"criterion_id", cs.criterion_id},
                             {"practice_id", contribution.practice_id},
                             {"practice_name", practice->name},
                             {"action", action}});
        }
      }
    }
    criteria.push_back({{"criterion_id", cs.criterion_id},
                        {"name", criterion->name},
                        {"score", cs.score},
                        {"display", display_score(cs.score)},
                        {"weight_total", weight_total}});
  }

  const auto& overall = scores.overall;
  json overall_json = {{"computed", overall.computed},
                       {"computed_display", display_score(overall.computed)},
                       {"adjusted", nullable(overall.adjusted)},
                       {"adjustment_rationale", overall.adjustment_rationale},
                       {"effective", overall.effective()},
                       {"effective_display", display_score(overall.effective())},
                       {"band", scores.band},
                       {"band_statement", band_statement(scores.band)}};

  json session_json = {{"id", session.id()},
                       {"model", {{"id", model.id}, {"name", model.name}, {"version", session.model_ref().version}}},
                       {"gathering_mode", std::string(to_string(session.gathering_mode()))},
                       {"cloned_from", session.cloned_from() ? json(*session.cloned_from()) : json(nullptr)},
                       {"assessors", session.assessors()}};

  return {{"session", session_json},
          {"org_profile", session.org_profile()},
          {"practices", practices},
          {"criteria", criteria},
          {"overall", overall_json},
          {"gaps", gaps},
          {"actions", actions},
          {"generated_at", generated_at}};
}

std::string render_structured(const json& report) { return report.dump(2) + "\n"; }

std::string render_markdown(const json& report) {
  std::ostringstream out;
  const auto& session = report.at("session");
  const auto& profile = report.at("org_profile");
  out << "# Executive report: " << session.at("model").at("name").get<std::string>() << "\n\n";
  out << "- Session: " << session.at("id").get<std::string>() << "\n";
  out << "- Model: " << session.at("model").at("id").get<std::string>() << " (version "
      << session.at("model").at("version").get<int>() << ")\n";
  out << "- Gathering mode: " << session.at("gathering_mode").get<std::string>() << "\n";
  if (!session.at("cloned_from").is_null()) {
    out << "- Corrects session: " << session.at("cloned_from").get<std::string>() << "\n";
  }
  out << "- Generated at: " << report.at("generated_at").get<std::string>() << "\n\n";

  out << "## Organization profile\n\n";
  out << "- Industrial sector: " << profile.at("sector").get<std::string>() << "\n";
  out << "- Number of employees: " << profile.at("employee_band").get<std::string>() << "\n";
  out << "- Economic activity: " << profile.at("activity_description").get<std::string>() << "\n";
  out << "- Approximate number of customers: " << profile.at("approx_customer_count").get<std::int64_t>()
      << "\n\n";

  out << "## Evaluation team\n\n";
  const auto& assessors = session.at("assessors");
  if (assessors.empty()) out << "No assessors recorded.\n";
  for (const auto& a : assessors) {
    out << "- " << a.at("display_name").get<std::string>() << " (" << a.at("domain_role").get<std::string>()
        << ")\n";
  }
  out << "\n";

  out << "## Results by consensus\n\n";
  out << "| Criterion | Practice | Average level | Weighting in % | Average by criterion |\n";
  out << "|---|---|---|---|---|\n";
  for (const auto& c : report.at("criteria")) {
    bool first = true;
    for (const auto& p : report.at("practices")) {
      if (p.at("criterion_id") != c.at("criterion_id")) continue;
      out << "| " << (first ? cell(c.at("name").get<std::string>()) : "") << " | "
          << cell(p.at("name").get<std::string>()) << " | " << p.at("effective_display").get<std::string>()
          << " | " << p.at("weight_display").get<std::string>() << "% | "
          << (first ? c.at("display").get<std::string>() : "") << " |\n";
      first = false;
    }
  }
  const auto& overall = report.at("overall");
  out << "\nGeneral level: " << overall.at("effective_display").get<std::string>() << "\n";
  if (!overall.at("adjusted").is_null()) {
    out << "\nThe team adjusted the general level from the computed "
        << overall.at("computed_display").get<std::string>() << ". Rationale: "
        << overall.at("adjustment_rationale").get<std::string>() << "\n";
  }
  out << "\nMaturity band: " << overall.at("effective_display").get<std::string>() << ", "
      << overall.at("band_statement").get<std::string>() << ".\n\n";

  out << "## Main gaps identified\n\n";
  const auto& gaps = report.at("gaps");
  if (gaps.empty()) {
    out << "No gaps recorded.\n";
  } else {
    for (const auto& c : report.at("criteria")) {
      bool header = false;
      for (const auto& g : gaps) {
        if (g.at("criterion_id") != c.at("criterion_id")) continue;
        if (!header) {
          out << "### " << c.at("name").get<std::string>() << "\n\n";
          header = true;
        }
        out << "- " << g.at("practice_name").get<std::string>() << " [" << g.at("severity").get<std::string>()
            << "]: " << g.at("description").get<std::string>() << "\n";
      }
      if (header) out << "\n";
    }
  }
  out << "\n## Improvement actions\n\n";
  const auto& actions = report.at("actions");
  if (actions.empty()) out << "No improvement actions recorded.\n";
  for (const auto& a : actions) {
    out << "- " << a.at("practice_name").get<std::string>() << ": " << a.at("action").get<std::string>()
        << "\n";
  }
  return out.str();
}

std::string generate_report(const AssessmentSession& session, ReportFormat format,
                            const std::string& generated_at) {
  const auto report = build_report(session, generated_at);
  return format == ReportFormat::kStructured ? render_structured(report) : render_markdown(report);
}

std::vector<ChartPoint> chart_data(const AssessmentSession& session) {
  const auto& scores = frozen_scores(session);
  std::vector<ChartPoint> out;
  for (const auto& cs : scores.criteria) {
    out.push_back({cs.criterion_id, find_criterion(session.model(), cs.criterion_id)->name, cs.score});
  }
  out.push_back({"overall", "General level", scores.overall.effective()});
  return out;
}

nlohmann::json what_if_document(const AssessmentSession& session, const ScoreSummary& summary, const WeightSet& weights) {
  nlohmann::json criteria = nlohmann::json::array();
  for (const auto& c : summary.criteria) {
    criteria.push_back({{"criterion_id", c.criterion_id},
                        {"name", find_criterion(session.model(), c.criterion_id)->name},
                        {"score", c.score},
                        {"display", display_score(c.score)}});
  }
  return {{"session_id", session.id()},
          {"weights", weights},
          {"criteria", criteria},
          {"overall", {{"computed", summary.overall.computed},
                       {"effective", summary.overall.effective()},
                       {"display", display_score(summary.overall.effective())}}},
          {"band", summary.band},
          {"scores", summary}};
}

void to_json(nlohmann::json& j, const ChartPoint& v) {
  j = {{"id", v.id}, {"label", v.label}, {"value", v.value}};
}

}  // namespace align
