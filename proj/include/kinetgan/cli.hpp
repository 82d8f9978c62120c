#pragma once

#include <string>
#include <vector>

namespace kinetgan::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Runs one subcommand. Exit codes: 0 success, 1 usage error, 2 runtime/data
// error. argv excludes the program name.
int run(const std::vector<std::string>& argv);
int run(int argc, char** argv);

}  // namespace kinetgan::cli
