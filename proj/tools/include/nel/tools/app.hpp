#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nel::tools {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kRuntimeFailure = 3 };

/// Entry point of the `nel` command; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nel::tools
