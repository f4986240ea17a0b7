#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace xids::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitMissingArtifact = 4;

/// Runs one xids command. `args` excludes the program name. Normal output
/// goes to `out`, diagnostics to `err`; the return value is the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// argv-style entry point for main().
int run_cli(int argc, char** argv);

}  // namespace xids::cli
