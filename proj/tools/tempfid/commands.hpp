#pragma once

namespace tempfid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

/// Parses arguments, runs the chosen subcommand and maps errors to exit codes.
int run(int argc, const char* const* argv);

}  // namespace tempfid::cli
