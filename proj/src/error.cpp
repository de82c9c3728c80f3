#include "sentiment/error.hpp"

namespace sentiment {

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
    case ErrorCode::kUnsupportedScheme:
      return 1;
    case ErrorCode::kNonFinite:
    case ErrorCode::kStaleCache:
      return 3;
    default:
      return 2;
  }
}

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidScore: return "invalid-score";
    case ErrorCode::kUnsupportedScheme: return "unsupported-scheme";
    case ErrorCode::kInconsistentLabel: return "inconsistency";
    case ErrorCode::kSchemeMismatch: return "scheme-mismatch";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kMissingFile: return "missing-file";
    case ErrorCode::kMalformedRecord: return "malformed-record";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kChecksumMismatch: return "checksum-mismatch";
    case ErrorCode::kCountMismatch: return "count-mismatch";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kStaleCache: return "stale-cache";
    case ErrorCode::kInsufficientSamples: return "insufficient-samples";
    case ErrorCode::kInvalidTarget: return "invalid-target";
    case ErrorCode::kRemoteService: return "remote-service";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace sentiment
