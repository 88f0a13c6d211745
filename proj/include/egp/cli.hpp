#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace egp {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_negative = 1,  // analysis-negative: not identified, invalid instrument, incompatible data
    exit_usage = 2,
    exit_input = 3,
};

/// Runs the `egp` command line; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace egp
