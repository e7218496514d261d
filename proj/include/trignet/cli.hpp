#pragma once

#include <string>
#include <vector>

namespace trignet {

/// Runs one CLI invocation (argv without the program name). Returns the
/// process exit status: 0 success, 1 failed check, 2 usage/config/user
/// error. User errors print a message, never a stack trace.
int cli_run(const std::vector<std::string>& args);

}  // namespace trignet
