#pragma once

#include <ostream>

namespace gcid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // verify failure or numerical error
inline constexpr int kExitUsage = 2;    // bad flags, bad config, refused overwrite

/// Parses the command line, runs one subcommand and returns the exit status.
/// Reports and tables go to `out` unless --out names a file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gcid::cli
