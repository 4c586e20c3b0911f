#pragma once

namespace d2d {

// Subcommands: generate, communities, graph, solve, run.
// Exit codes: 0 success, 2 validation error, 3 no feasible path (solve), 4 internal.
int run_cli(int argc, const char* const* argv);

}  // namespace d2d
