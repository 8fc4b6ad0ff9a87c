#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ogss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: ingest, train-policy, explore, train-blunder, evaluate,
// sweep-alpha, perft, engine-check. `args` excludes the program name.
// Returns 0 on success, 1 on runtime failure, 2 on usage or config errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace ogss::cli
