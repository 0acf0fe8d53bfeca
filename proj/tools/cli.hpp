#pragma once

#include <string>
#include <vector>

namespace gab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

/// Runs the gab command line. `args` excludes the program name. Returns the
/// process exit code: 0 success, 2 configuration or validation error,
/// 3 numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace gab::cli
