#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace noisescope::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kUsageError = 2,
  kValidationError = 3,
  kFitFailure = 4,
};

/// Parses `args` (without the program name), runs the subcommand and returns
/// its exit code. Summaries go to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace noisescope::cli
