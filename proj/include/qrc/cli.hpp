#pragma once

// Command-line front end, callable in-process so tests can drive it.

#include <iosfwd>
#include <string>
#include <vector>

namespace qrc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInfeasible = 2;

/// BQB14 ideal-case guessing probability, emitted as an annotation on QBER sweeps.
inline constexpr double kBqb14IdealGuess = 0.854;

/// Runs `qrc <args...>` (args exclude the program name). Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace qrc
