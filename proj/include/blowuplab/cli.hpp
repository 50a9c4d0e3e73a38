#pragma once

#include <string>
#include <vector>

namespace blowuplab::cli {

/// Runs the command-line front end; returns the process exit code
/// (0 success, 1 numerical failure, 2 config error, 3 budget exhausted).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace blowuplab::cli
