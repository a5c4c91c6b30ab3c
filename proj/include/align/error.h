#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace align {

// Machine-readable error codes shared by every module, the HTTP layer and the
// CLI exit-code table.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidModel,
  kUnknownModel,
  kUnknownCriterion,
  kUnknownPractice,
  kUnknownAssessor,
  kDuplicateAssessor,
  kLevelOutOfRange,
  kScoreOutOfRange,
  kOutOfRange,
  kEmptyInput,
  kEmptyRationale,
  kAllWeightsZero,
  kInvalidWeights,
  kWrongPhase,
  kNoAssessors,
  kUnscorablePractice,
  kNotFound,
  kChecksumMismatch,
  kImmutabilityViolation,
  kLockHeld,
  kInternal,
};

// Error families drive HTTP status codes and CLI exit codes.
enum class ErrorFamily { kValidation, kNotFound, kConflict, kCorruption, kLock, kInternal };

std::string_view to_string(ErrorCode code);
ErrorFamily family_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string path = {})
      : std::runtime_error(std::move(message)), code_(code), path_(std::move(path)) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view machine_code() const noexcept { return to_string(code_); }
  // Offending field or entity path, e.g. "criteria[1].practices[0]"; may be empty.
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

}  // namespace align
