#include "ogss/oracle/mock_oracle.hpp"

#include <algorithm>
#include <array>
#include <climits>

namespace ogss::oracle {

namespace {

using Table = std::array<int, 64>;

// Piece-square tables from White's point of view, rank 8 first.
constexpr Table kPawnTable = {
    0,  0,  0,  0,  0,  0,  0,  0,   50, 50, 50, 50, 50, 50, 50, 50,
    10, 10, 20, 30, 30, 20, 10, 10,  5,  5,  10, 25, 25, 10, 5,  5,
    0,  0,  0,  20, 20, 0,  0,  0,   5,  -5, -10, 0, 0, -10, -5, 5,
    5,  10, 10, -20, -20, 10, 10, 5, 0,  0,  0,  0,  0,  0,  0,  0};
constexpr Table kKnightTable = {
    -50, -40, -30, -30, -30, -30, -40, -50, -40, -20, 0,   0,   0,   0,   -20, -40,
    -30, 0,   10,  15,  15,  10,  0,   -30, -30, 5,   15,  20,  20,  15,  5,   -30,
    -30, 0,   15,  20,  20,  15,  0,   -30, -30, 5,   10,  15,  15,  10,  5,   -30,
    -40, -20, 0,   5,   5,   0,   -20, -40, -50, -40, -30, -30, -30, -30, -40, -50};
constexpr Table kBishopTable = {
    -20, -10, -10, -10, -10, -10, -10, -20, -10, 0,   0,   0,   0,   0,   0,   -10,
    -10, 0,   5,   10,  10,  5,   0,   -10, -10, 5,   5,   10,  10,  5,   5,   -10,
    -10, 0,   10,  10,  10,  10,  0,   -10, -10, 10,  10,  10,  10,  10,  10,  -10,
    -10, 5,   0,   0,   0,   0,   5,   -10, -20, -10, -10, -10, -10, -10, -10, -20};
constexpr Table kRookTable = {
    0,  0, 0, 0, 0, 0, 0, 0,  5,  10, 10, 10, 10, 10, 10, 5,
    -5, 0, 0, 0, 0, 0, 0, -5, -5, 0,  0,  0,  0,  0,  0,  -5,
    -5, 0, 0, 0, 0, 0, 0, -5, -5, 0,  0,  0,  0,  0,  0,  -5,
    -5, 0, 0, 0, 0, 0, 0, -5, 0,  0,  0,  5,  5,  0,  0,  0};
constexpr Table kQueenTable = {
    -20, -10, -10, -5, -5, -10, -10, -20, -10, 0,   0,   0,  0,  0,   0,   -10,
    -10, 0,   5,   5,  5,  5,   0,   -10, -5,  0,   5,   5,  5,  5,   0,   -5,
    0,   0,   5,   5,  5,  5,   0,   -5,  -10, 5,   5,   5,  5,  5,   0,   -10,
    -10, 0,   5,   0,  0,  0,   0,   -10, -20, -10, -10, -5, -5, -10, -10, -20};
constexpr Table kKingTable = {
    -30, -40, -40, -50, -50, -40, -40, -30, -30, -40, -40, -50, -50, -40, -40, -30,
    -30, -40, -40, -50, -50, -40, -40, -30, -30, -40, -40, -50, -50, -40, -40, -30,
    -20, -30, -30, -40, -40, -30, -30, -20, -10, -20, -20, -20, -20, -20, -20, -10,
    20,  20,  0,   0,   0,   0,   20,  20,  20,  30,  10,  0,   0,   10,  30,  20};

const Table& table_for(chess::PieceType t) {
  switch (t) {
    case chess::PieceType::Pawn: return kPawnTable;
    case chess::PieceType::Knight: return kKnightTable;
    case chess::PieceType::Bishop: return kBishopTable;
    case chess::PieceType::Rook: return kRookTable;
    case chess::PieceType::Queen: return kQueenTable;
    default: return kKingTable;
  }
}

bool is_capture(const chess::BoardState& state, const chess::MoveCode& m) {
  if (m.promotion != chess::Promotion::None) return true;
  if (state.at(m.to) != chess::Piece::None) return true;
  return state.en_passant() && *state.en_passant() == m.to &&
         chess::type_of(state.at(m.from)) == chess::PieceType::Pawn;
}

int captured_value(const chess::BoardState& state, const chess::MoveCode& m) {
  const chess::Piece victim = state.at(m.to);
  return victim == chess::Piece::None ? kPawnValue : piece_value(chess::type_of(victim));
}

}  // namespace

int piece_value(chess::PieceType type) {
  switch (type) {
    case chess::PieceType::Pawn: return kPawnValue;
    case chess::PieceType::Knight: return kKnightValue;
    case chess::PieceType::Bishop: return kBishopValue;
    case chess::PieceType::Rook: return kRookValue;
    case chess::PieceType::Queen: return kQueenValue;
    default: return 0;
  }
}

int static_eval(const chess::BoardState& state, bool positional) {
  int white = 0;
  for (int i = 0; i < 64; ++i) {
    const chess::Piece p = state.at(chess::Square(i));
    if (p == chess::Piece::None) continue;
    const chess::PieceType t = chess::type_of(p);
    const bool is_white = chess::color_of(p) == chess::Color::White;
    int v = piece_value(t);
    if (positional) {
      const int file = i & 7;
      const int rank = i >> 3;
      v += table_for(t)[is_white ? (7 - rank) * 8 + file : rank * 8 + file];
    }
    white += is_white ? v : -v;
  }
  return state.side_to_move() == chess::Color::White ? white : -white;
}

// Captures-only alpha-beta with stand-pat; most valuable victim first.
int MockOracle::quiesce(const chess::BoardState& state, int alpha, int beta, int depth) const {
  const int stand = static_eval(state, positional_);
  if (stand >= beta || depth == 0) return stand;
  if (stand > alpha) alpha = stand;
  std::vector<std::pair<int, chess::MoveCode>> captures;
  for (const auto& m : chess::legal_moves(state))
    if (is_capture(state, m)) captures.emplace_back(-captured_value(state, m), m);
  std::sort(captures.begin(), captures.end());
  for (const auto& [key, m] : captures) {
    const int score = -quiesce(chess::apply_move_unchecked(state, m), -beta, -alpha, depth - 1);
    if (score >= beta) return score;
    if (score > alpha) alpha = score;
  }
  return alpha;
}

SearchResult MockOracle::search(const chess::BoardState& state, const OracleLimits& /*limits*/) {
  const auto moves = chess::legal_moves(state);
  SearchResult result;
  if (moves.empty()) {
    result.score = state.in_check() ? CentipawnScore{-kMateScore, true} : CentipawnScore{0, false};
    return result;
  }
  int best = INT_MIN;
  for (const auto& m : moves) {
    const chess::BoardState child = chess::apply_move_unchecked(state, m);
    CentipawnScore score;
    if (chess::legal_moves(child).empty()) {
      score = child.in_check() ? CentipawnScore{map_mate(1), true} : CentipawnScore{0, false};
    } else {
      score = {quiescence_ ? -quiesce(child, -kMateScore, kMateScore, kQuiescenceDepth)
                           : -static_eval(child, positional_),
               false};
    }
    if (score.value > best) {
      best = score.value;
      result.score = score;
      result.best_move = m;
    }
  }
  return result;
}

std::string MockOracle::identity() const {
  std::string id = "mock-material";
  if (positional_) id += "-pst";
  if (quiescence_) id += "-q";
  return id;
}

OracleFactory mock_oracle_factory(bool positional, bool quiescence) {
  return [positional, quiescence] { return std::make_unique<MockOracle>(positional, quiescence); };
}

}  // namespace ogss::oracle
