#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fastwave {

enum class ErrorCode {
  kInvalidFilterWidth,
  kZeroChannels,
  kZeroLayers,
  kInvalidConfig,
  kMagicMismatch,
  kShapeMismatch,
  kTruncatedFile,
  kFormatMismatch,
  kInvalidFormat,
  kEmptyInput,
  kLengthMismatch,
  kChannelMismatch,
  kZeroLength,
  kSignalTooShort,
  kBinOutOfRange,
  kInvalidArgument,
  kIo,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this exception; `code()` is what callers
// and tests branch on, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace fastwave
