#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace oversmooth {

enum class ErrorCode {
  InvalidArgument,
  IndexOutOfRange,
  SelfLoopRejected,
  DimensionMismatch,
  // metrics
  EmptyTarget,
  NoRemotePairs,
  NoNeighbourPairs,
  ConstantInput,
  // gnn
  EmptyMask,
  UndefinedGap,
  ZeroNormRow,
  NonFiniteLoss,
  // data io
  ParseError,
  SelfLoopInFile,
  ClassTooSmall,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// The single exception type thrown by the library. `code()` identifies the
/// failure; `line()` is the 1-based input line for parse failures, else 0.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::size_t line = 0);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::size_t line_;
};

}  // namespace oversmooth
