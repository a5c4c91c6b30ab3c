#include "align/error.h"

namespace align {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidModel: return "invalid-model";
    case ErrorCode::kUnknownModel: return "unknown-model";
    case ErrorCode::kUnknownCriterion: return "unknown-criterion";
    case ErrorCode::kUnknownPractice: return "unknown-practice";
    case ErrorCode::kUnknownAssessor: return "unknown-assessor";
    case ErrorCode::kDuplicateAssessor: return "duplicate-assessor";
    case ErrorCode::kLevelOutOfRange: return "level-out-of-range";
    case ErrorCode::kScoreOutOfRange: return "score-out-of-range";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kEmptyRationale: return "empty-rationale";
    case ErrorCode::kAllWeightsZero: return "all-weights-zero";
    case ErrorCode::kInvalidWeights: return "invalid-weights";
    case ErrorCode::kWrongPhase: return "wrong-phase";
    case ErrorCode::kNoAssessors: return "no-assessors";
    case ErrorCode::kUnscorablePractice: return "unscorable-practice";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kChecksumMismatch: return "checksum-mismatch";
    case ErrorCode::kImmutabilityViolation: return "immutability-violation";
    case ErrorCode::kLockHeld: return "lock-held";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

ErrorFamily family_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownModel:
    case ErrorCode::kNotFound:
      return ErrorFamily::kNotFound;
    case ErrorCode::kWrongPhase:
    case ErrorCode::kImmutabilityViolation:
      return ErrorFamily::kConflict;
    case ErrorCode::kChecksumMismatch:
      return ErrorFamily::kCorruption;
    case ErrorCode::kLockHeld:
      return ErrorFamily::kLock;
    case ErrorCode::kInternal:
      return ErrorFamily::kInternal;
    default:
      return ErrorFamily::kValidation;
  }
}

}  // namespace align
