#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "align/rubric.h"

namespace align {

inline constexpr std::string_view kCustomerAlignmentModelId = "customer-alignment";
inline constexpr int kBuiltinModelVersion = 1;

struct CatalogEntry {
  MaturityModel model;
  std::string source;
  std::string version;
};

// The customer-alignment model: 3 criteria, 17 practices, 85 reference states.
// Parsed once from the embedded rubric file; the reference is stable.
const MaturityModel& builtin_model();

// Rubric file text exactly as embedded in the binary.
std::string_view builtin_model_text();

const std::vector<CatalogEntry>& builtin_catalog();

// nullptr when no built-in model has this id.
const CatalogEntry* find_builtin(std::string_view model_id);

}  // namespace align
