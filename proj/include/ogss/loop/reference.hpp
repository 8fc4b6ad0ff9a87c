#pragma once

#include <cstdint>
#include <vector>

#include "ogss/data/pgn.hpp"
#include "ogss/oracle/oracle.hpp"

namespace ogss::loop {

struct ReferenceOptions {
  int max_plies = 300;
  int opening_plies = 4;
  // Chance that a side plays a uniformly random legal move instead of the
  // oracle's choice.
  double noise = 0.15;
  oracle::OracleLimits limits;
};

// Oracle-vs-oracle games with seeded noise, standing in for a downloaded
// game collection. Results follow the usual rules (checkmate, stalemate,
// fifty-move, threefold, insufficient material); games that reach max_plies
// are Unknown. Deterministic under (seed, deterministic oracle).
std::vector<data::GameRecordRaw> generate_reference_games(oracle::Oracle& oracle, std::size_t n, std::uint64_t seed,
                                                          const ReferenceOptions& opts = {});

}  // namespace ogss::loop
