#include "fastwave/error.hpp"

namespace fastwave {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidFilterWidth: return "invalid-filter-width";
    case ErrorCode::kZeroChannels: return "zero-channels";
    case ErrorCode::kZeroLayers: return "zero-layers";
    case ErrorCode::kInvalidConfig: return "invalid-config";
    case ErrorCode::kMagicMismatch: return "magic-mismatch";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kTruncatedFile: return "truncated-file";
    case ErrorCode::kFormatMismatch: return "format-mismatch";
    case ErrorCode::kInvalidFormat: return "invalid-format";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kChannelMismatch: return "channel-mismatch";
    case ErrorCode::kZeroLength: return "zero-length";
    case ErrorCode::kSignalTooShort: return "signal-too-short";
    case ErrorCode::kBinOutOfRange: return "bin-out-of-range";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kIo: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace fastwave
