#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace screening {

// Exit codes: 0 success, 1 usage error, 2 data error, 3 convergence warning
// under --strict.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitConvergence = 3 };

// The `screen` command line; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace screening
