#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace align {

inline constexpr int kMinLevel = 1;
inline constexpr int kMaxLevel = 5;
inline constexpr int kLevelCount = kMaxLevel - kMinLevel + 1;

struct LevelDefinition {
  int level = 0;
  std::string label;
  std::string meaning;

  bool operator==(const LevelDefinition&) const = default;
};

// One cell of the rubric: what a practice looks like at a given level.
struct LevelDescriptor {
  int level = 0;
  std::string reference_state;

  bool operator==(const LevelDescriptor&) const = default;
};

struct Practice {
  std::string id;
  std::string name;
  std::string description;
  std::vector<LevelDescriptor> descriptors;
  // Alternative published names; used for lookup only.
  std::vector<std::string> aliases;

  bool operator==(const Practice&) const = default;
};

struct Criterion {
  std::string id;
  std::string name;
  std::string objective;
  std::vector<Practice> practices;
  std::vector<std::string> aliases;

  bool operator==(const Criterion&) const = default;
};

struct MaturityModel {
  std::string id;
  std::string name;
  std::string description;
  std::vector<LevelDefinition> scale;
  std::vector<Criterion> criteria;

  bool operator==(const MaturityModel&) const = default;

  std::size_t practice_count() const;
  std::size_t descriptor_count() const;
};

struct Violation {
  std::string path;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

// Checks every structural invariant of a rubric. Violations are returned as
// data; this never throws.
ValidationResult validate_model(const MaturityModel& model);

// Throws Error(kUnknownPractice) or Error(kLevelOutOfRange).
const LevelDescriptor& lookup_descriptor(const MaturityModel& model, std::string_view practice_id,
                                         int level);

const Practice* find_practice(const MaturityModel& model, std::string_view practice_id);
const Criterion* find_criterion(const MaturityModel& model, std::string_view criterion_id);
// Criterion that owns the given practice, or nullptr.
const Criterion* criterion_of(const MaturityModel& model, std::string_view practice_id);

// Resolves an id, canonical name or alias. Names compare case-insensitively
// and ignore a trailing period.
const Practice* resolve_practice(const MaturityModel& model, std::string_view key);
const Criterion* resolve_criterion(const MaturityModel& model, std::string_view key);

const LevelDefinition* find_level(const MaturityModel& model, int level);

void to_json(nlohmann::json& j, const LevelDefinition& v);
void from_json(const nlohmann::json& j, LevelDefinition& v);
void to_json(nlohmann::json& j, const LevelDescriptor& v);
void from_json(const nlohmann::json& j, LevelDescriptor& v);
void to_json(nlohmann::json& j, const Practice& v);
void from_json(const nlohmann::json& j, Practice& v);
void to_json(nlohmann::json& j, const Criterion& v);
void from_json(const nlohmann::json& j, Criterion& v);
void to_json(nlohmann::json& j, const MaturityModel& v);
void from_json(const nlohmann::json& j, MaturityModel& v);

// Rubric file format. parse_model throws Error(kInvalidArgument) on malformed
// JSON or missing keys; it does not run validate_model.
std::string serialize_model(const MaturityModel& model);
MaturityModel parse_model(std::string_view text);

}  // namespace align
