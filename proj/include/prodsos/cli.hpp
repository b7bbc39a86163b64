#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prodsos {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  /// malformed input: JSON, flags, set specs, states
  kExitInput = 2,
  /// the conic solver did not reach a usable point
  kExitSolver = 3,
  /// relaxation or kernel order too small (or below a preset threshold)
  kExitOrder = 4,
};

/// Entry point of the prodsos tool; args excludes the program name.
/// Results go to `out` (or --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prodsos
