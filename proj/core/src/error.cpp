#include "oversmooth/error.hpp"

namespace oversmooth {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SelfLoopRejected: return "SelfLoopRejected";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTarget: return "EmptyTarget";
    case ErrorCode::NoRemotePairs: return "NoRemotePairs";
    case ErrorCode::NoNeighbourPairs: return "NoNeighbourPairs";
    case ErrorCode::ConstantInput: return "ConstantInput";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::UndefinedGap: return "UndefinedGap";
    case ErrorCode::ZeroNormRow: return "ZeroNormRow";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SelfLoopInFile: return "SelfLoopInFile";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      line_(line) {}

}  // namespace oversmooth
