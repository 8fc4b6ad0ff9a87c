#pragma once

#include <array>

#include "ogss/chess/board.hpp"

namespace ogss::chess {

inline constexpr int kPlanes = 12;
inline constexpr int kMetadataSize = 5;
inline constexpr int kMoveVectorSize = 3;

// 12 planes of 8x8, plane-major: value(plane, rank, file) at
// plane * 64 + rank * 8 + file. Plane order [P,N,B,R,Q,K,p,n,b,r,q,k].
struct PieceTensor {
  std::array<float, kPlanes * 64> values{};

  float at(int plane, int rank, int file) const { return values[plane * 64 + rank * 8 + file]; }
};

// [WK-castle, WQ-castle, BK-castle, BQ-castle, white-to-move].
using MetadataVector = std::array<float, kMetadataSize>;

// [from / 63, to / 63, promotion / 4].
using MoveVector = std::array<float, kMoveVectorSize>;

PieceTensor encode_board(const BoardState& state);
MetadataVector encode_metadata(const BoardState& state);
MoveVector encode_move(const MoveCode& move);

}  // namespace ogss::chess
