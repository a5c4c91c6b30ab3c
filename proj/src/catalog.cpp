#include "align/catalog.h"

#include "align/error.h"

namespace align {

namespace detail {
extern const std::string_view kCustomerAlignmentRubric;
}

std::string_view builtin_model_text() { return detail::kCustomerAlignmentRubric; }

const std::vector<CatalogEntry>& builtin_catalog() {
  static const std::vector<CatalogEntry> catalog = [] {
    auto model = parse_model(detail::kCustomerAlignmentRubric);
    if (!validate_model(model).ok()) {
      throw Error(ErrorCode::kInternal, "embedded customer-alignment rubric failed validation");
    }
    return std::vector<CatalogEntry>{CatalogEntry{
        std::move(model),
        "Published maturity framework for business and IT alignment with customers "
        "(English reference states as published)",
        std::to_string(kBuiltinModelVersion)}};
  }();
  return catalog;
}

const MaturityModel& builtin_model() { return builtin_catalog().front().model; }

const CatalogEntry* find_builtin(std::string_view model_id) {
  for (const auto& entry : builtin_catalog())
    if (entry.model.id == model_id) return &entry;
  return nullptr;
}

}  // namespace align
