#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "align/session.h"

namespace align {

enum class ReportFormat { kStructured, kHumanReadable };

// "structured"/"json" or "markdown"/"md"/"human-readable".
ReportFormat parse_report_format(std::string_view s);
std::string_view to_string(ReportFormat f);

struct ChartPoint {
  std::string id;  // criterion id, or "overall"
  std::string label;
  double value = 0.0;

  bool operator==(const ChartPoint&) const = default;
};

// Executive report as a JSON document. The session must be finalized or
// reported (Error(kWrongPhase) otherwise). Rendering does not change the
// session; `generated_at` is the only field that varies between runs.
nlohmann::json build_report(const AssessmentSession& session, const std::string& generated_at);

std::string render_structured(const nlohmann::json& report);
std::string render_markdown(const nlohmann::json& report);

std::string generate_report(const AssessmentSession& session, ReportFormat format,
                            const std::string& generated_at);

// One point per criterion in model order, then the overall score.
std::vector<ChartPoint> chart_data(const AssessmentSession& session);

// What-if scores as served to the UI sliders and printed by the CLI.
nlohmann::json what_if_document(const AssessmentSession& session, const ScoreSummary& summary,
                                const WeightSet& weights);

void to_json(nlohmann::json& j, const ChartPoint& v);

}  // namespace align
