#pragma once

#include <ostream>

namespace coiso {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitDegenerate = 2,
  kExitCheckFailed = 3,
};

/// Runs the tool. Results and machine-readable error objects go to `out`,
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coiso
