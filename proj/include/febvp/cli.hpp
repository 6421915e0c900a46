#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace febvp::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Runs the tool on `args` (without the program name), writing results to
/// `out` and diagnostics to `err`. The default seed is read from FEBVP_SEED.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace febvp::cli
