#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace caevpr {

// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Runs the `caevpr` command line (args exclude the program name). Failures
/// are reported as one line on `err` and mapped to an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace caevpr
