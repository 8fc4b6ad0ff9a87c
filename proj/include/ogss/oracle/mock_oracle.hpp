#pragma once

#include "ogss/oracle/oracle.hpp"

namespace ogss::oracle {

// Piece values used by the material evaluator.
inline constexpr int kPawnValue = 100;
inline constexpr int kKnightValue = 300;
inline constexpr int kBishopValue = 300;
inline constexpr int kRookValue = 500;
inline constexpr int kQueenValue = 900;

int piece_value(chess::PieceType type);

// Material balance (plus the optional piece-square term) from the side to
// move's perspective, no search.
int static_eval(const chess::BoardState& state, bool positional);

// Hermetic deterministic oracle: a 1-ply search over the side to move's legal
// moves, each scored by the material balance after the move (mover's view).
// A mating move scores as mate in 1 (+9999), a stalemating move 0. Best move
// is the first maximum in canonical order.
//
// With `positional` set, a piece-square term (|term| < 100 per position) is
// added to the material balance; the default is pure material.
//
// With `quiescence` set, each root move is scored by a captures-only search
// (stand-pat, up to kQuiescenceDepth captures) instead of the static balance,
// so defended pieces and even trades are no longer read as material loss.
class MockOracle final : public Oracle {
 public:
  static constexpr int kQuiescenceDepth = 8;

  explicit MockOracle(bool positional = false, bool quiescence = false)
      : positional_(positional), quiescence_(quiescence) {}

  SearchResult search(const chess::BoardState& state, const OracleLimits& limits) override;
  // "mock-material", plus "-pst" and/or "-q".
  std::string identity() const override;

 private:
  int quiesce(const chess::BoardState& state, int alpha, int beta, int depth) const;

  bool positional_;
  bool quiescence_;
};

OracleFactory mock_oracle_factory(bool positional = false, bool quiescence = false);

}  // namespace ogss::oracle
