#include "align/store.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "align/error.h"

namespace align {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kRecordMagic = "align-record";
constexpr int kRecordFormat = 1;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, fmt::format("cannot read {}", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void fsync_directory(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

std::string digest_input(std::string_view kind, std::string_view id, int version, std::string_view payload) {
  return fmt::format("{}\n{}\n{}\n{}", kind, id, version, payload);
}

json strip_mutable(json session) {
  session.erase("phase");
  session.erase("audit_log");
  return session;
}

}  // namespace

std::string_view to_string(RecordKind kind) { return kind == RecordKind::kModel ? "model" : "session"; }

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInternal, "sha256 failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

void validate_record_id(std::string_view id) {
  const bool ok = !id.empty() && id.size() <= 128 && id.front() != '.' &&
                  std::all_of(id.begin(), id.end(), [](char c) {
                    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
                  });
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                fmt::format("invalid id '{}': use 1-128 characters of [A-Za-z0-9._-]", id), "id");
  }
}

Store::Store(fs::path root, StoreOptions options) : root_(std::move(root)), options_(options) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) {
    throw Error(ErrorCode::kInternal, fmt::format("cannot create data directory {}: {}", root_.string(),
                                                  ec.message()));
  }
}

fs::path Store::record_path(RecordKind kind, const std::string& id, int version) const {
  return root_ / std::string(to_string(kind)) / id / fmt::format("v{}.record", version);
}

json Store::read_index() const {
  const auto path = root_ / "index.json";
  if (!fs::exists(path)) return json{{"model", json::object()}, {"session", json::object()}};
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kChecksumMismatch, fmt::format("index file is corrupt: {}", e.what()), "index.json");
  }
}

void Store::write_file(const fs::path& path, std::string_view data, std::size_t& budget) {
  fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::kInternal, fmt::format("cannot open {}: {}", tmp.string(), std::strerror(errno)));
  }
  const bool crash = options_.crash_after_bytes && budget < data.size();
  const auto to_write = crash ? budget : data.size();
  std::size_t written = 0;
  while (written < to_write) {
    const auto n = ::write(fd, data.data() + written, to_write - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(ErrorCode::kInternal, fmt::format("write to {} failed: {}", tmp.string(), std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (crash) {
    ::close(fd);
    budget = 0;
    throw SimulatedCrash();
  }
  if (options_.crash_after_bytes) budget -= data.size();
  if (::fsync(fd) != 0) {
    ::close(fd);
    throw Error(ErrorCode::kInternal, fmt::format("fsync of {} failed", tmp.string()));
  }
  ::close(fd);
  fs::rename(tmp, path);
  fsync_directory(path.parent_path());
}

void Store::check_session_transition(const json& previous, const json& next) const {
  const auto prev_phase = previous.value("phase", std::string{});
  if (prev_phase != "finalized" && prev_phase != "reported") return;
  const auto id = previous.value("id", std::string{});
  const auto violation = [&](std::string why) {
    return Error(ErrorCode::kImmutabilityViolation,
                 fmt::format("session {} is {}: {}", id, prev_phase, why), "phase");
  };
  if (prev_phase == "reported") throw violation("reported sessions are immutable");
  if (next.value("phase", std::string{}) != "reported") {
    throw violation("only the finalized -> reported transition may be stored");
  }
  if (strip_mutable(previous) != strip_mutable(next)) throw violation("finalized content changed");
  const auto& prev_log = previous.at("audit_log");
  const auto& next_log = next.at("audit_log");
  if (next_log.size() != prev_log.size() + 1 ||
      !std::equal(prev_log.begin(), prev_log.end(), next_log.begin())) {
    throw violation("audit log must only gain the report event");
  }
}

int Store::put(RecordKind kind, const std::string& id, const json& payload) {
  validate_record_id(id);
  std::lock_guard lock(write_mutex_);
  auto index = read_index();
  auto& entries = index[std::string(to_string(kind))];
  int latest = 0;
  if (entries.contains(id)) latest = entries[id].value("latest", 0);
  if (kind == RecordKind::kSession && latest > 0) {
    check_session_transition(get(kind, id, latest), payload);
  }
  const int version = latest + 1;
  const auto body = payload.dump(2);
  const auto checksum = sha256_hex(digest_input(to_string(kind), id, version, body));
  const auto header = fmt::format("{} {} {} {} {} {}\n", kRecordMagic, kRecordFormat, to_string(kind), id,
                                  version, checksum);

  std::size_t budget = options_.crash_after_bytes.value_or(0);
  write_file(record_path(kind, id, version), header + body, budget);
  const bool tombstoned = entries.contains(id) && entries[id].value("tombstoned", false);
  entries[id] = {{"latest", version}, {"tombstoned", tombstoned}};
  write_file(root_ / "index.json", index.dump(2) + "\n", budget);
  return version;
}

json Store::get(RecordKind kind, const std::string& id, std::optional<int> version) const {
  validate_record_id(id);
  const auto index = read_index();
  const auto& entries = index.at(std::string(to_string(kind)));
  if (!entries.contains(id)) {
    throw Error(ErrorCode::kNotFound, fmt::format("{} {} not found", to_string(kind), id), id);
  }
  const auto& entry = entries.at(id);
  const int latest = entry.value("latest", 0);
  if (!version && entry.value("tombstoned", false)) {
    throw Error(ErrorCode::kNotFound, fmt::format("{} {} was deleted", to_string(kind), id), id);
  }
  const int v = version.value_or(latest);
  if (v < 1 || v > latest) {
    throw Error(ErrorCode::kNotFound, fmt::format("{} {} has no version {}", to_string(kind), id, v), id);
  }
  const auto path = record_path(kind, id, v);
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::kChecksumMismatch,
                fmt::format("{} {} version {} is missing on disk", to_string(kind), id, v), path.string());
  }
  const auto corrupt = [&](std::string_view why) {
    return Error(ErrorCode::kChecksumMismatch,
                 fmt::format("{} {} version {} is corrupt: {}", to_string(kind), id, v, why), path.string());
  };
  const auto newline = text.find('\n');
  if (newline == std::string::npos) throw corrupt("no header");
  std::istringstream header(text.substr(0, newline));
  std::string magic, stored_kind, stored_id, checksum;
  int format = 0, stored_version = 0;
  header >> magic >> format >> stored_kind >> stored_id >> stored_version >> checksum;
  if (!header || magic != kRecordMagic || format != kRecordFormat || stored_kind != to_string(kind) ||
      stored_id != id || stored_version != v) {
    throw corrupt("header mismatch");
  }
  const std::string_view body = std::string_view(text).substr(newline + 1);
  if (sha256_hex(digest_input(stored_kind, stored_id, stored_version, body)) != checksum) {
    throw corrupt("checksum mismatch");
  }
  try {
    return json::parse(body);
  } catch (const json::exception&) {
    throw corrupt("payload is not JSON");
  }
}

std::vector<RecordSummary> Store::list(RecordKind kind, const ListFilter& filter) const {
  const auto index = read_index();
  std::vector<RecordSummary> out;
  for (const auto& [id, entry] : index.at(std::string(to_string(kind))).items()) {
    const bool tombstoned = entry.value("tombstoned", false);
    if (tombstoned && !filter.include_tombstoned) continue;
    if (!id.starts_with(filter.id_prefix)) continue;
    out.push_back({kind, id, entry.value("latest", 0), tombstoned});
  }
  return out;
}

std::optional<int> Store::latest_version(RecordKind kind, const std::string& id) const {
  const auto index = read_index();
  const auto& entries = index.at(std::string(to_string(kind)));
  if (!entries.contains(id) || entries.at(id).value("tombstoned", false)) return std::nullopt;
  return entries.at(id).value("latest", 0);
}

bool Store::contains(RecordKind kind, const std::string& id) const {
  return latest_version(kind, id).has_value();
}

void Store::tombstone(RecordKind kind, const std::string& id) {
  validate_record_id(id);
  std::lock_guard lock(write_mutex_);
  auto index = read_index();
  auto& entries = index[std::string(to_string(kind))];
  if (!entries.contains(id)) {
    throw Error(ErrorCode::kNotFound, fmt::format("{} {} not found", to_string(kind), id), id);
  }
  entries[id]["tombstoned"] = true;
  std::size_t budget = options_.crash_after_bytes.value_or(0);
  write_file(root_ / "index.json", index.dump(2) + "\n", budget);
}

}  // namespace align
