#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ogss/util/error.hpp"

namespace ogss::chess {

// a1 = 0, b1 = 1, ..., h8 = 63.
class Square {
 public:
  constexpr Square() = default;
  constexpr explicit Square(int index) : index_(static_cast<std::uint8_t>(index)) {}
  static constexpr Square at(int file, int rank) { return Square(rank * 8 + file); }

  constexpr int index() const { return index_; }
  constexpr int file() const { return index_ & 7; }
  constexpr int rank() const { return index_ >> 3; }

  std::string name() const;
  static std::optional<Square> parse(std::string_view text);

  constexpr auto operator<=>(const Square&) const = default;

 private:
  std::uint8_t index_ = 0;
};

enum class Color : std::uint8_t { White = 0, Black = 1 };
constexpr Color opposite(Color c) { return c == Color::White ? Color::Black : Color::White; }

enum class PieceType : std::uint8_t { Pawn = 0, Knight, Bishop, Rook, Queen, King };

// Numbering matches the PieceTensor plane order plus one (0 = empty).
enum class Piece : std::uint8_t {
  None = 0,
  WhitePawn, WhiteKnight, WhiteBishop, WhiteRook, WhiteQueen, WhiteKing,
  BlackPawn, BlackKnight, BlackBishop, BlackRook, BlackQueen, BlackKing,
};

constexpr Piece make_piece(Color c, PieceType t) {
  return static_cast<Piece>(1 + static_cast<int>(t) + (c == Color::Black ? 6 : 0));
}
constexpr Color color_of(Piece p) {
  return static_cast<int>(p) >= 7 ? Color::Black : Color::White;
}
constexpr PieceType type_of(Piece p) {
  return static_cast<PieceType>((static_cast<int>(p) - 1) % 6);
}
// Plane index 0..11 in [P,N,B,R,Q,K,p,n,b,r,q,k] order.
constexpr int plane_of(Piece p) { return static_cast<int>(p) - 1; }

char piece_char(Piece p);

enum class Promotion : std::uint8_t { None = 0, Knight = 1, Bishop = 2, Rook = 3, Queen = 4 };
constexpr int kPromotionClasses = 5;

// (from, to, promotion). The defaulted ordering is the canonical move order:
// ascending from, then to, then promotion.
struct MoveCode {
  Square from;
  Square to;
  Promotion promotion = Promotion::None;

  constexpr auto operator<=>(const MoveCode&) const = default;

  // UCI long algebraic: "e2e4", "a7a8q".
  std::string uci() const;
  static std::optional<MoveCode> parse_uci(std::string_view text);
};

struct CastlingRights {
  bool white_king = false;
  bool white_queen = false;
  bool black_king = false;
  bool black_queen = false;

  bool any() const { return white_king || white_queen || black_king || black_queen; }
  auto operator<=>(const CastlingRights&) const = default;
};

// FEN problems. field() names the offending FEN field.
class FenError : public Error {
 public:
  FenError(std::string field, const std::string& message)
      : Error("chess_core", "parse_fen", field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IllegalMoveError : public Error {
 public:
  explicit IllegalMoveError(const std::string& message)
      : Error("chess_core", "apply_move", message) {}
};

inline constexpr std::string_view kStartFen =
    "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";

// Full game-legal position. Immutable in practice: every operation returns a
// new value.
class BoardState {
 public:
  static BoardState startpos();

  Piece at(Square s) const { return squares_[s.index()]; }
  Color side_to_move() const { return side_; }
  const CastlingRights& castling() const { return castling_; }
  std::optional<Square> en_passant() const { return en_passant_; }
  int halfmove_clock() const { return halfmove_; }
  int fullmove_number() const { return fullmove_; }

  Square king_square(Color c) const;
  bool in_check() const;
  bool is_attacked(Square s, Color by) const;
  int piece_count() const;

  // Placement + side + castling + capturable en-passant square. Two positions
  // with equal keys are the same position for repetition purposes.
  std::string repetition_key() const;

  bool operator==(const BoardState&) const = default;

 private:
  friend BoardState parse_fen(std::string_view);
  friend BoardState apply_move_unchecked(const BoardState&, const MoveCode&);

  std::array<Piece, 64> squares_{};
  Color side_ = Color::White;
  CastlingRights castling_;
  std::optional<Square> en_passant_;
  int halfmove_ = 0;
  int fullmove_ = 1;
};

// Accepts exactly six whitespace-separated fields. The keyword "startpos" is
// also accepted.
BoardState parse_fen(std::string_view text);

// Normalized FEN: castling rights are emitted in KQkq order and only when the
// king and rook still stand on their home squares; the en-passant field is
// kept only when it is consistent with a double pawn push just played.
std::string to_fen(const BoardState& state);

// Legal moves in canonical order. Empty for checkmate and stalemate.
std::vector<MoveCode> legal_moves(const BoardState& state);

// Throws IllegalMoveError unless move is in legal_moves(state).
BoardState apply_move(const BoardState& state, const MoveCode& move);

// No legality check; move must come from legal_moves().
BoardState apply_move_unchecked(const BoardState& state, const MoveCode& move);

bool is_checkmate(const BoardState& state);
bool is_stalemate(const BoardState& state);

// Insufficient mating material for both sides (K vs K, K+minor vs K).
bool insufficient_material(const BoardState& state);

std::uint64_t perft(const BoardState& state, int depth);

}  // namespace ogss::chess
