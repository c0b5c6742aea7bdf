#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hytile {

/// Exit codes of the hytile tool.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int negative = 1;
inline constexpr int unknown = 2;
inline constexpr int usage = 64;
} // namespace exit_code

/// Runs `hytile <args...>`; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hytile
