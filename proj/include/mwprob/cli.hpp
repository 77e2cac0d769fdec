#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mwprob {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitCheckFailed = 2 };

/// Runs one command; `args` excludes the program name.
int run_cli(std::vector<std::string> args, std::ostream &out,
            std::ostream &err);

} // namespace mwprob
