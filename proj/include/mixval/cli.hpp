#pragma once

#include <string>
#include <vector>

namespace mixval {

inline constexpr const char* kVersion = "0.1.0";

/// Runs the command-line tool on `args` (program name excluded) and returns
/// the exit code: 0 success, 1 usage, 2 data or model error, 3 numerical failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace mixval
