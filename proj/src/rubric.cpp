#include "align/rubric.h"

#include <algorithm>
#include <cctype>
#include <map>

#include <fmt/format.h>

#include "align/error.h"

namespace align {

namespace {

std::string normalize_name(std::string_view s) {
  while (!s.empty() && (s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back())))) {
    s.remove_suffix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  std::string out;
  out.reserve(s.size());
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}

bool matches(std::string_view key, const std::string& id, const std::string& name,
             const std::vector<std::string>& aliases) {
  if (key == id) return true;
  const auto norm = normalize_name(key);
  if (norm == normalize_name(name)) return true;
  return std::any_of(aliases.begin(), aliases.end(),
                     [&](const std::string& a) { return normalize_name(a) == norm; });
}

void validate_descriptors(const Practice& practice, const std::string& path,
                          std::vector<Violation>& out) {
  if (practice.descriptors.size() != static_cast<std::size_t>(kLevelCount)) {
    out.push_back({path, fmt::format("practice {}: expected {} descriptors, found {}", practice.id,
                                     kLevelCount, practice.descriptors.size())});
  }
  std::map<int, std::size_t> seen;
  for (std::size_t k = 0; k < practice.descriptors.size(); ++k) {
    const auto& d = practice.descriptors[k];
    const auto dpath = fmt::format("{}.descriptors[{}]", path, k);
    if (d.level < kMinLevel || d.level > kMaxLevel) {
      out.push_back({dpath, fmt::format("practice {}: descriptor level {} outside {}..{}",
                                        practice.id, d.level, kMinLevel, kMaxLevel)});
    } else if (auto [it, inserted] = seen.emplace(d.level, k); !inserted) {
      out.push_back({dpath, fmt::format("practice {}: level {} described at descriptors[{}] and "
                                        "descriptors[{}]",
                                        practice.id, d.level, it->second, k)});
    }
    if (d.reference_state.empty()) {
      out.push_back({dpath, fmt::format("practice {}: level {} reference state is empty",
                                        practice.id, d.level)});
    }
  }
  for (int level = kMinLevel; level <= kMaxLevel; ++level) {
    if (!seen.contains(level) && practice.descriptors.size() == static_cast<std::size_t>(kLevelCount)) {
      out.push_back({path, fmt::format("practice {}: no descriptor for level {}", practice.id, level)});
    }
  }
}

}  // namespace

std::size_t MaturityModel::practice_count() const {
  std::size_t n = 0;
  for (const auto& c : criteria) n += c.practices.size();
  return n;
}

std::size_t MaturityModel::descriptor_count() const {
  std::size_t n = 0;
  for (const auto& c : criteria)
    for (const auto& p : c.practices) n += p.descriptors.size();
  return n;
}

ValidationResult validate_model(const MaturityModel& model) {
  std::vector<Violation> out;
  if (model.id.empty()) out.push_back({"id", "model id is empty"});
  if (model.name.empty()) out.push_back({"name", "model name is empty"});

  if (model.scale.size() != static_cast<std::size_t>(kLevelCount)) {
    out.push_back({"scale", fmt::format("scale: expected {} levels, found {}", kLevelCount,
                                        model.scale.size())});
  }
  std::map<int, std::size_t> levels;
  for (std::size_t k = 0; k < model.scale.size(); ++k) {
    const auto& def = model.scale[k];
    const auto path = fmt::format("scale[{}]", k);
    if (def.level < kMinLevel || def.level > kMaxLevel) {
      out.push_back({path, fmt::format("scale level {} outside {}..{}", def.level, kMinLevel,
                                       kMaxLevel)});
    } else if (auto [it, inserted] = levels.emplace(def.level, k); !inserted) {
      out.push_back({path, fmt::format("scale level {} defined at scale[{}] and scale[{}]",
                                       def.level, it->second, k)});
    }
    if (def.label.empty()) out.push_back({path, fmt::format("scale level {} label is empty", def.level)});
  }

  if (model.criteria.empty()) out.push_back({"criteria", "model has no criteria"});

  std::map<std::string, std::size_t> criterion_ids;
  std::map<std::string, std::string> practice_owner;  // practice id -> path, model-wide
  for (std::size_t i = 0; i < model.criteria.size(); ++i) {
    const auto& c = model.criteria[i];
    const auto cpath = fmt::format("criteria[{}]", i);
    if (c.id.empty()) out.push_back({cpath, "criterion id is empty"});
    if (auto [it, inserted] = criterion_ids.emplace(c.id, i); !inserted) {
      out.push_back({cpath, fmt::format("duplicate criterion id {} at criteria[{}] and criteria[{}]",
                                        c.id, it->second, i)});
    }
    if (c.practices.empty()) {
      out.push_back({cpath, fmt::format("criterion {}: no practices", c.id)});
    }
    std::map<std::string, std::size_t> local_ids;
    for (std::size_t k = 0; k < c.practices.size(); ++k) {
      const auto& p = c.practices[k];
      const auto ppath = fmt::format("{}.practices[{}]", cpath, k);
      if (p.id.empty()) out.push_back({ppath, "practice id is empty"});
      if (auto [it, inserted] = local_ids.emplace(p.id, k); !inserted) {
        out.push_back({ppath, fmt::format("criterion {}: duplicate practice id {} at practices[{}] "
                                          "and practices[{}]",
                                          c.id, p.id, it->second, k)});
      } else if (auto [owner, fresh] = practice_owner.emplace(p.id, ppath); !fresh) {
        // Responses reference practices by id alone, so ids must be unique model-wide.
        out.push_back({ppath, fmt::format("practice id {} already used at {}", p.id, owner->second)});
      }
      validate_descriptors(p, ppath, out);
    }
  }
  return ValidationResult{std::move(out)};
}

const Practice* find_practice(const MaturityModel& model, std::string_view practice_id) {
  for (const auto& c : model.criteria)
    for (const auto& p : c.practices)
      if (p.id == practice_id) return &p;
  return nullptr;
}

const Criterion* find_criterion(const MaturityModel& model, std::string_view criterion_id) {
  for (const auto& c : model.criteria)
    if (c.id == criterion_id) return &c;
  return nullptr;
}

const Criterion* criterion_of(const MaturityModel& model, std::string_view practice_id) {
  for (const auto& c : model.criteria)
    for (const auto& p : c.practices)
      if (p.id == practice_id) return &c;
  return nullptr;
}

const Practice* resolve_practice(const MaturityModel& model, std::string_view key) {
  if (const auto* p = find_practice(model, key)) return p;
  for (const auto& c : model.criteria)
    for (const auto& p : c.practices)
      if (matches(key, p.id, p.name, p.aliases)) return &p;
  return nullptr;
}

const Criterion* resolve_criterion(const MaturityModel& model, std::string_view key) {
  if (const auto* c = find_criterion(model, key)) return c;
  for (const auto& c : model.criteria)
    if (matches(key, c.id, c.name, c.aliases)) return &c;
  return nullptr;
}

const LevelDefinition* find_level(const MaturityModel& model, int level) {
  for (const auto& def : model.scale)
    if (def.level == level) return &def;
  return nullptr;
}

const LevelDescriptor& lookup_descriptor(const MaturityModel& model, std::string_view practice_id,
                                         int level) {
  const auto* practice = find_practice(model, practice_id);
  if (practice == nullptr) {
    throw Error(ErrorCode::kUnknownPractice, fmt::format("unknown practice: {}", practice_id),
                std::string(practice_id));
  }
  if (level < kMinLevel || level > kMaxLevel) {
    throw Error(ErrorCode::kLevelOutOfRange,
                fmt::format("level {} outside {}..{}", level, kMinLevel, kMaxLevel), "level");
  }
  for (const auto& d : practice->descriptors)
    if (d.level == level) return d;
  throw Error(ErrorCode::kInvalidModel,
              fmt::format("practice {} has no descriptor for level {}", practice_id, level),
              std::string(practice_id));
}

void to_json(nlohmann::json& j, const LevelDefinition& v) {
  j = {{"level", v.level}, {"label", v.label}, {"meaning", v.meaning}};
}
void from_json(const nlohmann::json& j, LevelDefinition& v) {
  j.at("level").get_to(v.level);
  j.at("label").get_to(v.label);
  v.meaning = j.value("meaning", std::string{});
}

void to_json(nlohmann::json& j, const LevelDescriptor& v) {
  j = {{"level", v.level}, {"reference_state", v.reference_state}};
}
void from_json(const nlohmann::json& j, LevelDescriptor& v) {
  j.at("level").get_to(v.level);
  j.at("reference_state").get_to(v.reference_state);
}

void to_json(nlohmann::json& j, const Practice& v) {
  j = {{"id", v.id}, {"name", v.name}, {"description", v.description}, {"descriptors", v.descriptors}};
  if (!v.aliases.empty()) j["aliases"] = v.aliases;
}
void from_json(const nlohmann::json& j, Practice& v) {
  j.at("id").get_to(v.id);
  j.at("name").get_to(v.name);
  v.description = j.value("description", std::string{});
  j.at("descriptors").get_to(v.descriptors);
  v.aliases = j.value("aliases", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const Criterion& v) {
  j = {{"id", v.id}, {"name", v.name}, {"objective", v.objective}, {"practices", v.practices}};
  if (!v.aliases.empty()) j["aliases"] = v.aliases;
}
void from_json(const nlohmann::json& j, Criterion& v) {
  j.at("id").get_to(v.id);
  j.at("name").get_to(v.name);
  v.objective = j.value("objective", std::string{});
  j.at("practices").get_to(v.practices);
  v.aliases = j.value("aliases", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const MaturityModel& v) {
  j = {{"id", v.id},
       {"name", v.name},
       {"description", v.description},
       {"scale", v.scale},
       {"criteria", v.criteria}};
}
void from_json(const nlohmann::json& j, MaturityModel& v) {
  j.at("id").get_to(v.id);
  j.at("name").get_to(v.name);
  v.description = j.value("description", std::string{});
  j.at("scale").get_to(v.scale);
  j.at("criteria").get_to(v.criteria);
}

std::string serialize_model(const MaturityModel& model) {
  return nlohmann::json(model).dump(2) + "\n";
}

MaturityModel parse_model(std::string_view text) {
  try {
    return nlohmann::json::parse(text).get<MaturityModel>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("malformed rubric file: {}", e.what()));
  }
}

}  // namespace align
