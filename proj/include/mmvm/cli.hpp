#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mmvm::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kRuntimeError = 2 };

/// Entry point of the `mmvm` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mmvm::cli
