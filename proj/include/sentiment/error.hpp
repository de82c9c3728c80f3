#pragma once

#include <stdexcept>
#include <string>

namespace sentiment {

enum class ErrorCode {
  kInvalidScore,
  kUnsupportedScheme,
  kInconsistentLabel,
  kSchemeMismatch,
  kConfig,
  kMissingFile,
  kMalformedRecord,
  kDimensionMismatch,
  kChecksumMismatch,
  kCountMismatch,
  kNonFinite,
  kDuplicateId,
  kEmptyInput,
  kLengthMismatch,
  kStaleCache,
  kInsufficientSamples,
  kInvalidTarget,
  kRemoteService,
  kIo,
};

// Process exit status for an error: 1 usage/config, 2 data, 3 numerical.
int exit_code(ErrorCode code);
const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sentiment
