#include "ogss/chess/encode.hpp"

namespace ogss::chess {

PieceTensor encode_board(const BoardState& state) {
  PieceTensor t;
  for (int i = 0; i < 64; ++i) {
    const Piece p = state.at(Square(i));
    if (p != Piece::None) t.values[plane_of(p) * 64 + i] = 1.0f;
  }
  return t;
}

MetadataVector encode_metadata(const BoardState& state) {
  const auto& c = state.castling();
  return {c.white_king ? 1.0f : 0.0f, c.white_queen ? 1.0f : 0.0f, c.black_king ? 1.0f : 0.0f,
          c.black_queen ? 1.0f : 0.0f, state.side_to_move() == Color::White ? 1.0f : 0.0f};
}

MoveVector encode_move(const MoveCode& move) {
  return {static_cast<float>(move.from.index()) / 63.0f,
          static_cast<float>(move.to.index()) / 63.0f,
          static_cast<float>(static_cast<int>(move.promotion)) / 4.0f};
}

}  // namespace ogss::chess
