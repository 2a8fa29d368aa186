#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace magicsim::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSimulationError = 1;
inline constexpr int kExitInputError = 2;

// Runs one command line (args excludes the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace magicsim::cli
