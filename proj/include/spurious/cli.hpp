#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spurious {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,  // a report's own verification did not pass
  kExitInput = 2,
  kExitNumerical = 3,
  kExitConstruction = 4,
};

/// Runs `spurious-lens <fit|analyze|construct|simulate> [flags]` with the
/// arguments after the program name. Reports go to --output or `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spurious
