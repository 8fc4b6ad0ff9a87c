#include "ogss/chess/san.hpp"

#include <optional>

namespace ogss::chess {

namespace {

std::optional<PieceType> piece_letter(char c) {
  switch (c) {
    case 'N': return PieceType::Knight;
    case 'B': return PieceType::Bishop;
    case 'R': return PieceType::Rook;
    case 'Q': return PieceType::Queen;
    case 'K': return PieceType::King;
    default: return std::nullopt;
  }
}

std::optional<Promotion> promotion_letter(char c) {
  switch (c) {
    case 'N': case 'n': return Promotion::Knight;
    case 'B': case 'b': return Promotion::Bishop;
    case 'R': case 'r': return Promotion::Rook;
    case 'Q': case 'q': return Promotion::Queen;
    default: return std::nullopt;
  }
}

bool is_castle(const BoardState& s, const MoveCode& m) {
  return type_of(s.at(m.from)) == PieceType::King && std::abs(m.to.file() - m.from.file()) == 2;
}

}  // namespace

SanResult parse_san(const BoardState& state, std::string_view text) {
  while (!text.empty() && (text.back() == '+' || text.back() == '#' || text.back() == '!' ||
                           text.back() == '?'))
    text.remove_suffix(1);
  if (text.empty()) return {SanStatus::Malformed, {}};

  const auto legal = legal_moves(state);
  auto pick = [&](auto&& matches) -> SanResult {
    SanResult result{SanStatus::Illegal, {}};
    int count = 0;
    for (const auto& m : legal) {
      if (matches(m)) {
        result.move = m;
        ++count;
      }
    }
    if (count == 1) result.status = SanStatus::Ok;
    if (count > 1) result.status = SanStatus::Ambiguous;
    return result;
  };

  if (text == "O-O" || text == "0-0" || text == "O-O-O" || text == "0-0-0") {
    const bool long_side = text.size() == 5;
    return pick([&](const MoveCode& m) {
      return is_castle(state, m) && (m.to.file() == (long_side ? 2 : 6));
    });
  }

  PieceType type = PieceType::Pawn;
  std::size_t pos = 0;
  if (auto t = piece_letter(text[0])) {
    type = *t;
    pos = 1;
  }

  Promotion promo = Promotion::None;
  std::string_view body = text.substr(pos);
  if (type == PieceType::Pawn && body.size() >= 3) {
    const char last = body.back();
    if (auto p = promotion_letter(last); p && (last >= 'A' && last <= 'Z')) {
      promo = *p;
      body.remove_suffix(1);
      if (!body.empty() && body.back() == '=') body.remove_suffix(1);
    }
  }
  if (body.size() < 2) return {SanStatus::Malformed, {}};
  auto dest = Square::parse(body.substr(body.size() - 2));
  if (!dest) return {SanStatus::Malformed, {}};
  body.remove_suffix(2);
  if (!body.empty() && (body.back() == 'x' || body.back() == ':')) body.remove_suffix(1);

  int from_file = -1;
  int from_rank = -1;
  for (char c : body) {
    if (c >= 'a' && c <= 'h' && from_file < 0) {
      from_file = c - 'a';
    } else if (c >= '1' && c <= '8' && from_rank < 0) {
      from_rank = c - '1';
    } else {
      return {SanStatus::Malformed, {}};
    }
  }

  return pick([&](const MoveCode& m) {
    const Piece p = state.at(m.from);
    if (type_of(p) != type || m.to != *dest || m.promotion != promo) return false;
    if (type == PieceType::King && is_castle(state, m)) return false;
    if (from_file >= 0 && m.from.file() != from_file) return false;
    if (type == PieceType::Pawn && from_file < 0 && m.from.file() != m.to.file()) return false;
    if (from_rank >= 0 && m.from.rank() != from_rank) return false;
    return true;
  });
}

std::string to_san(const BoardState& state, const MoveCode& move) {
  std::string out;
  const Piece p = state.at(move.from);
  const PieceType type = type_of(p);
  const bool capture = state.at(move.to) != Piece::None ||
                       (type == PieceType::Pawn && move.from.file() != move.to.file());
  if (is_castle(state, move)) {
    out = move.to.file() == 6 ? "O-O" : "O-O-O";
  } else if (type == PieceType::Pawn) {
    if (capture) {
      out += static_cast<char>('a' + move.from.file());
      out += 'x';
    }
    out += move.to.name();
    if (move.promotion != Promotion::None) {
      out += '=';
      out += "?NBRQ"[static_cast<int>(move.promotion)];
    }
  } else {
    out += "PNBRQK"[static_cast<int>(type)];
    bool clash = false;
    bool same_file = false;
    bool same_rank = false;
    for (const auto& other : legal_moves(state)) {
      if (other.to != move.to || other.from == move.from || state.at(other.from) != p) continue;
      clash = true;
      if (other.from.file() == move.from.file()) same_file = true;
      if (other.from.rank() == move.from.rank()) same_rank = true;
    }
    if (clash) {
      if (!same_file) {
        out += static_cast<char>('a' + move.from.file());
      } else if (!same_rank) {
        out += static_cast<char>('1' + move.from.rank());
      } else {
        out += move.from.name();
      }
    }
    if (capture) out += 'x';
    out += move.to.name();
  }
  const BoardState next = apply_move_unchecked(state, move);
  if (next.in_check()) out += legal_moves(next).empty() ? '#' : '+';
  return out;
}

}  // namespace ogss::chess
