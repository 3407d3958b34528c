#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csid::app {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kDataError = 3,
  kNumericError = 4,
};

/// Runs the `csid` tool. `args` excludes the program name. Regular output
/// goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csid::app
