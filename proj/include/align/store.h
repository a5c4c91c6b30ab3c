#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace align {

enum class RecordKind { kModel, kSession };

std::string_view to_string(RecordKind kind);

struct RecordSummary {
  RecordKind kind = RecordKind::kModel;
  std::string id;
  int latest_version = 0;
  bool tombstoned = false;
};

struct ListFilter {
  std::string id_prefix;
  bool include_tombstoned = false;
};

struct StoreOptions {
  // Test hook: a put stops after writing this many bytes in total (across the
  // record and index files) and throws SimulatedCrash, leaving whatever a real
  // crash at that offset would leave on disk.
  std::optional<std::size_t> crash_after_bytes;
};

struct SimulatedCrash : std::runtime_error {
  SimulatedCrash() : std::runtime_error("simulated crash during write") {}
};

// On-disk versioned record store:
//   <root>/index.json                 latest version + tombstone per record
//   <root>/<kind>/<id>/v<N>.record    one immutable file per version
// A record file is a header line "align-record 1 <kind> <id> <version> <sha256>"
// followed by the JSON payload; the digest covers kind, id, version and the
// payload bytes. Every file is committed by write-to-temp, fsync, rename, so
// readers see either the previous or the next version, never a torn one.
// Writes are serialized inside one Store; across processes the CLI holds an
// exclusive lock on the directory.
class Store {
 public:
  explicit Store(std::filesystem::path root, StoreOptions options = {});

  const std::filesystem::path& root() const { return root_; }

  // Returns the new version. Sessions whose latest stored phase is finalized
  // or reported only accept the finalized -> reported transition
  // (Error(kImmutabilityViolation) otherwise).
  int put(RecordKind kind, const std::string& id, const nlohmann::json& payload);

  // Latest version when `version` is empty. Error(kNotFound) for unknown or
  // tombstoned ids (explicit versions of tombstoned records stay readable);
  // Error(kChecksumMismatch) when the stored bytes fail verification.
  nlohmann::json get(RecordKind kind, const std::string& id, std::optional<int> version = {}) const;

  std::vector<RecordSummary> list(RecordKind kind, const ListFilter& filter = {}) const;
  std::optional<int> latest_version(RecordKind kind, const std::string& id) const;
  bool contains(RecordKind kind, const std::string& id) const;

  // Logical delete; record files are never removed.
  void tombstone(RecordKind kind, const std::string& id);

  std::filesystem::path record_path(RecordKind kind, const std::string& id, int version) const;

 private:
  nlohmann::json read_index() const;
  void write_file(const std::filesystem::path& path, std::string_view data, std::size_t& budget);
  void check_session_transition(const nlohmann::json& previous, const nlohmann::json& next) const;

  std::filesystem::path root_;
  StoreOptions options_;
  std::mutex write_mutex_;
};

// Throws Error(kInvalidArgument) unless id is 1-128 chars of [A-Za-z0-9._-]
// and does not start with '.'.
void validate_record_id(std::string_view id);

std::string sha256_hex(std::string_view data);

}  // namespace align
