#pragma once

#include <iosfwd>

namespace spanseg {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

// Entry point of the `spanseg` tool: train, predict, evaluate, stats and
// generate subcommands. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spanseg
