#pragma once

#include <filesystem>
#include <iosfwd>

namespace bbassign {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitParseError = 2;
inline constexpr int kExitInfeasibleAnchors = 3;

/// Stats path used when --stats is absent: $BACKBONE_ASSIGN_STATS, else the shipped table.
std::filesystem::path default_stats_path();

/// Entry point for the `bbassign` tool. Data goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbassign
