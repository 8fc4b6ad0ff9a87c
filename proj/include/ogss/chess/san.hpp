#pragma once

#include <string>
#include <string_view>

#include "ogss/chess/board.hpp"

namespace ogss::chess {

enum class SanStatus { Ok, Malformed, Illegal, Ambiguous };

struct SanResult {
  SanStatus status = SanStatus::Malformed;
  MoveCode move;
};

// Resolves Standard Algebraic Notation against the legal moves of state.
// Accepts check/mate suffixes and trailing !/? annotations, "0-0" for
// "O-O", and promotions with or without '='.
SanResult parse_san(const BoardState& state, std::string_view text);

// SAN with minimal disambiguation and +/# suffixes. move must be legal.
std::string to_san(const BoardState& state, const MoveCode& move);

}  // namespace ogss::chess
