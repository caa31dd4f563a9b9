#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace oversmooth::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kUndefinedMetric = 3,
  kIo = 4,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace oversmooth::cli
