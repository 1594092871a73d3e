#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace patrol {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int validation = 2;
inline constexpr int numeric = 3;
}  // namespace exit_code

/// Runs one command line (argv[0] is the program name). Output files go where the flags
/// say; "-" or an absent -o means `out`. Diagnostics go to `err`.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace patrol
