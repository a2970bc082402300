#pragma once

// Command-line front end: simulate, optimize, compare, report, validate.

#include <iosfwd>
#include <string>
#include <vector>

namespace fwa {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace fwa
