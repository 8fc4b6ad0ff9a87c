#include "ogss/chess/board.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace ogss::chess {

namespace {

constexpr std::array<std::pair<int, int>, 8> kKnightSteps = {
    {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}}};
constexpr std::array<std::pair<int, int>, 8> kKingSteps = {
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
constexpr std::array<std::pair<int, int>, 4> kRookDirs = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
constexpr std::array<std::pair<int, int>, 4> kBishopDirs = {
    {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

constexpr bool on_board(int file, int rank) {
  return file >= 0 && file < 8 && rank >= 0 && rank < 8;
}

Piece piece_from_char(char c) {
  switch (c) {
    case 'P': return Piece::WhitePawn;
    case 'N': return Piece::WhiteKnight;
    case 'B': return Piece::WhiteBishop;
    case 'R': return Piece::WhiteRook;
    case 'Q': return Piece::WhiteQueen;
    case 'K': return Piece::WhiteKing;
    case 'p': return Piece::BlackPawn;
    case 'n': return Piece::BlackKnight;
    case 'b': return Piece::BlackBishop;
    case 'r': return Piece::BlackRook;
    case 'q': return Piece::BlackQueen;
    case 'k': return Piece::BlackKing;
    default: return Piece::None;
  }
}

PieceType promotion_type(Promotion p) {
  switch (p) {
    case Promotion::Knight: return PieceType::Knight;
    case Promotion::Bishop: return PieceType::Bishop;
    case Promotion::Rook: return PieceType::Rook;
    default: return PieceType::Queen;
  }
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r'))
      ++i;
    const std::size_t start = i;
    while (i < text.size() && !(text[i] == ' ' || text[i] == '\t' || text[i] == '\n' || text[i] == '\r'))
      ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

int parse_int_field(std::string_view text, const std::string& field, int min_value) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw FenError(field, "not an integer: '" + std::string(text) + "'");
  if (value < min_value)
    throw FenError(field, "must be >= " + std::to_string(min_value));
  return value;
}

}  // namespace

std::string Square::name() const {
  return std::string{static_cast<char>('a' + file()), static_cast<char>('1' + rank())};
}

std::optional<Square> Square::parse(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const int f = text[0] - 'a';
  const int r = text[1] - '1';
  if (!on_board(f, r)) return std::nullopt;
  return Square::at(f, r);
}

char piece_char(Piece p) {
  static constexpr char kChars[] = ".PNBRQKpnbrqk";
  return kChars[static_cast<int>(p)];
}

std::string MoveCode::uci() const {
  std::string s = from.name() + to.name();
  switch (promotion) {
    case Promotion::Knight: s += 'n'; break;
    case Promotion::Bishop: s += 'b'; break;
    case Promotion::Rook: s += 'r'; break;
    case Promotion::Queen: s += 'q'; break;
    case Promotion::None: break;
  }
  return s;
}

std::optional<MoveCode> MoveCode::parse_uci(std::string_view text) {
  if (text.size() != 4 && text.size() != 5) return std::nullopt;
  auto from = Square::parse(text.substr(0, 2));
  auto to = Square::parse(text.substr(2, 2));
  if (!from || !to) return std::nullopt;
  MoveCode m{*from, *to, Promotion::None};
  if (text.size() == 5) {
    switch (text[4]) {
      case 'n': m.promotion = Promotion::Knight; break;
      case 'b': m.promotion = Promotion::Bishop; break;
      case 'r': m.promotion = Promotion::Rook; break;
      case 'q': m.promotion = Promotion::Queen; break;
      default: return std::nullopt;
    }
  }
  return m;
}

BoardState BoardState::startpos() { return parse_fen(kStartFen); }

Square BoardState::king_square(Color c) const {
  const Piece king = make_piece(c, PieceType::King);
  for (int i = 0; i < 64; ++i)
    if (squares_[i] == king) return Square(i);
  return Square(0);
}

bool BoardState::is_attacked(Square s, Color by) const {
  const int f = s.file();
  const int r = s.rank();
  const int pawn_rank = by == Color::White ? r - 1 : r + 1;
  const Piece pawn = make_piece(by, PieceType::Pawn);
  for (int df : {-1, 1}) {
    if (on_board(f + df, pawn_rank) && squares_[Square::at(f + df, pawn_rank).index()] == pawn)
      return true;
  }
  const Piece knight = make_piece(by, PieceType::Knight);
  for (auto [df, dr] : kKnightSteps) {
    if (on_board(f + df, r + dr) && squares_[Square::at(f + df, r + dr).index()] == knight)
      return true;
  }
  const Piece king = make_piece(by, PieceType::King);
  for (auto [df, dr] : kKingSteps) {
    if (on_board(f + df, r + dr) && squares_[Square::at(f + df, r + dr).index()] == king)
      return true;
  }
  const Piece queen = make_piece(by, PieceType::Queen);
  const Piece rook = make_piece(by, PieceType::Rook);
  const Piece bishop = make_piece(by, PieceType::Bishop);
  for (auto [df, dr] : kRookDirs) {
    for (int ff = f + df, rr = r + dr; on_board(ff, rr); ff += df, rr += dr) {
      const Piece p = squares_[Square::at(ff, rr).index()];
      if (p == Piece::None) continue;
      if (p == rook || p == queen) return true;
      break;
    }
  }
  for (auto [df, dr] : kBishopDirs) {
    for (int ff = f + df, rr = r + dr; on_board(ff, rr); ff += df, rr += dr) {
      const Piece p = squares_[Square::at(ff, rr).index()];
      if (p == Piece::None) continue;
      if (p == bishop || p == queen) return true;
      break;
    }
  }
  return false;
}

bool BoardState::in_check() const {
  return is_attacked(king_square(side_), opposite(side_));
}

int BoardState::piece_count() const {
  return static_cast<int>(std::count_if(squares_.begin(), squares_.end(),
                                        [](Piece p) { return p != Piece::None; }));
}

std::string BoardState::repetition_key() const {
  std::string key(squares_.size() + 8, '.');
  for (int i = 0; i < 64; ++i) key[i] = piece_char(squares_[i]);
  key[64] = side_ == Color::White ? 'w' : 'b';
  key[65] = castling_.white_king ? 'K' : '-';
  key[66] = castling_.white_queen ? 'Q' : '-';
  key[67] = castling_.black_king ? 'k' : '-';
  key[68] = castling_.black_queen ? 'q' : '-';
  key[69] = key[70] = key[71] = '-';
  if (en_passant_) {
    // Only relevant if a pawn of the side to move could take en passant.
    const Square ep = *en_passant_;
    const int pawn_rank = side_ == Color::White ? ep.rank() - 1 : ep.rank() + 1;
    const Piece pawn = make_piece(side_, PieceType::Pawn);
    for (int df : {-1, 1}) {
      if (on_board(ep.file() + df, pawn_rank) &&
          squares_[Square::at(ep.file() + df, pawn_rank).index()] == pawn) {
        key[69] = 'e';
        key[70] = static_cast<char>('a' + ep.file());
        key[71] = static_cast<char>('1' + ep.rank());
      }
    }
  }
  return key;
}

BoardState parse_fen(std::string_view text) {
  if (text == "startpos") text = kStartFen;
  const auto fields = split_ws(text);
  if (fields.size() != 6)
    throw FenError("field-count", "expected 6 fields, got " + std::to_string(fields.size()));

  BoardState s;
  // Placement, rank 8 first.
  int rank = 7;
  int file = 0;
  for (char c : fields[0]) {
    if (c == '/') {
      if (file != 8) throw FenError("placement", "rank " + std::to_string(rank + 1) + " does not have 8 squares");
      --rank;
      file = 0;
      if (rank < 0) throw FenError("placement", "more than 8 ranks");
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) throw FenError("placement", "rank " + std::to_string(rank + 1) + " overflows");
    } else {
      const Piece p = piece_from_char(c);
      if (p == Piece::None) throw FenError("placement", std::string("illegal piece character '") + c + "'");
      if (file >= 8) throw FenError("placement", "rank " + std::to_string(rank + 1) + " overflows");
      s.squares_[Square::at(file, rank).index()] = p;
      ++file;
    }
  }
  if (rank != 0 || file != 8) throw FenError("placement", "expected 8 complete ranks");

  if (fields[1] == "w") {
    s.side_ = Color::White;
  } else if (fields[1] == "b") {
    s.side_ = Color::Black;
  } else {
    throw FenError("side", "expected 'w' or 'b'");
  }

  if (fields[2] != "-") {
    for (char c : fields[2]) {
      bool* flag = nullptr;
      switch (c) {
        case 'K': flag = &s.castling_.white_king; break;
        case 'Q': flag = &s.castling_.white_queen; break;
        case 'k': flag = &s.castling_.black_king; break;
        case 'q': flag = &s.castling_.black_queen; break;
        default: throw FenError("castling", std::string("illegal character '") + c + "'");
      }
      if (*flag) throw FenError("castling", std::string("duplicate right '") + c + "'");
      *flag = true;
    }
  }

  if (fields[3] != "-") {
    auto ep = Square::parse(fields[3]);
    if (!ep) throw FenError("en-passant", "not a square: '" + std::string(fields[3]) + "'");
    s.en_passant_ = ep;
  }
  s.halfmove_ = parse_int_field(fields[4], "halfmove", 0);
  s.fullmove_ = parse_int_field(fields[5], "fullmove", 1);

  int white_kings = 0;
  int black_kings = 0;
  for (int i = 0; i < 64; ++i) {
    const Piece p = s.squares_[i];
    if (p == Piece::WhiteKing) ++white_kings;
    if (p == Piece::BlackKing) ++black_kings;
    if ((p == Piece::WhitePawn || p == Piece::BlackPawn) && (i < 8 || i >= 56))
      throw FenError("placement", "pawn on first or last rank at " + Square(i).name());
  }
  if (white_kings != 1 || black_kings != 1)
    throw FenError("kings", "need exactly one king per side (white " + std::to_string(white_kings) +
                                ", black " + std::to_string(black_kings) + ")");
  if (s.is_attacked(s.king_square(opposite(s.side_)), s.side_))
    throw FenError("check", "side not to move is in check");

  // Normalization.
  auto& sq = s.squares_;
  if (sq[4] != Piece::WhiteKing) s.castling_.white_king = s.castling_.white_queen = false;
  if (sq[7] != Piece::WhiteRook) s.castling_.white_king = false;
  if (sq[0] != Piece::WhiteRook) s.castling_.white_queen = false;
  if (sq[60] != Piece::BlackKing) s.castling_.black_king = s.castling_.black_queen = false;
  if (sq[63] != Piece::BlackRook) s.castling_.black_king = false;
  if (sq[56] != Piece::BlackRook) s.castling_.black_queen = false;
  if (s.en_passant_) {
    const Square ep = *s.en_passant_;
    const bool white_to_move = s.side_ == Color::White;
    const int expected_rank = white_to_move ? 5 : 2;
    const int dir = white_to_move ? -8 : 8;  // towards the pushed pawn
    const Piece pushed = white_to_move ? Piece::BlackPawn : Piece::WhitePawn;
    const bool consistent = ep.rank() == expected_rank && sq[ep.index()] == Piece::None &&
                            sq[ep.index() - dir] == Piece::None && sq[ep.index() + dir] == pushed;
    if (!consistent) s.en_passant_.reset();
  }
  return s;
}

std::string to_fen(const BoardState& s) {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const Piece p = s.at(Square::at(file, rank));
      if (p == Piece::None) {
        ++empty;
        continue;
      }
      if (empty) out += static_cast<char>('0' + empty);
      empty = 0;
      out += piece_char(p);
    }
    if (empty) out += static_cast<char>('0' + empty);
    if (rank) out += '/';
  }
  out += s.side_to_move() == Color::White ? " w " : " b ";
  const auto& c = s.castling();
  if (!c.any()) {
    out += '-';
  } else {
    if (c.white_king) out += 'K';
    if (c.white_queen) out += 'Q';
    if (c.black_king) out += 'k';
    if (c.black_queen) out += 'q';
  }
  out += ' ';
  out += s.en_passant() ? s.en_passant()->name() : "-";
  out += ' ' + std::to_string(s.halfmove_clock()) + ' ' + std::to_string(s.fullmove_number());
  return out;
}

namespace {

void add_pawn_move(std::vector<MoveCode>& out, Square from, Square to) {
  if (to.rank() == 0 || to.rank() == 7) {
    for (Promotion p : {Promotion::Knight, Promotion::Bishop, Promotion::Rook, Promotion::Queen})
      out.push_back({from, to, p});
  } else {
    out.push_back({from, to, Promotion::None});
  }
}

std::vector<MoveCode> pseudo_legal(const BoardState& s) {
  std::vector<MoveCode> out;
  out.reserve(64);
  const Color us = s.side_to_move();
  const Color them = opposite(us);
  for (int i = 0; i < 64; ++i) {
    const Piece p = s.at(Square(i));
    if (p == Piece::None || color_of(p) != us) continue;
    const Square from(i);
    const int f = from.file();
    const int r = from.rank();
    switch (type_of(p)) {
      case PieceType::Pawn: {
        const int dr = us == Color::White ? 1 : -1;
        const int start_rank = us == Color::White ? 1 : 6;
        if (on_board(f, r + dr) && s.at(Square::at(f, r + dr)) == Piece::None) {
          add_pawn_move(out, from, Square::at(f, r + dr));
          if (r == start_rank && s.at(Square::at(f, r + 2 * dr)) == Piece::None)
            out.push_back({from, Square::at(f, r + 2 * dr), Promotion::None});
        }
        for (int df : {-1, 1}) {
          if (!on_board(f + df, r + dr)) continue;
          const Square to = Square::at(f + df, r + dr);
          const Piece target = s.at(to);
          if ((target != Piece::None && color_of(target) == them) || s.en_passant() == to)
            add_pawn_move(out, from, to);
        }
        break;
      }
      case PieceType::Knight:
      case PieceType::King: {
        const auto& steps = type_of(p) == PieceType::Knight ? kKnightSteps : kKingSteps;
        for (auto [df, dr] : steps) {
          if (!on_board(f + df, r + dr)) continue;
          const Square to = Square::at(f + df, r + dr);
          const Piece target = s.at(to);
          if (target == Piece::None || color_of(target) == them) out.push_back({from, to});
        }
        break;
      }
      default: {
        const PieceType t = type_of(p);
        auto slide = [&](const auto& dirs) {
          for (auto [df, dr] : dirs) {
            for (int ff = f + df, rr = r + dr; on_board(ff, rr); ff += df, rr += dr) {
              const Square to = Square::at(ff, rr);
              const Piece target = s.at(to);
              if (target == Piece::None) {
                out.push_back({from, to});
                continue;
              }
              if (color_of(target) == them) out.push_back({from, to});
              break;
            }
          }
        };
        if (t == PieceType::Rook || t == PieceType::Queen) slide(kRookDirs);
        if (t == PieceType::Bishop || t == PieceType::Queen) slide(kBishopDirs);
        break;
      }
    }
  }

  // Castling. Rights are normalized, so king and rook are on their squares.
  const auto& c = s.castling();
  const int base = us == Color::White ? 0 : 56;
  const bool king_side = us == Color::White ? c.white_king : c.black_king;
  const bool queen_side = us == Color::White ? c.white_queen : c.black_queen;
  if ((king_side || queen_side) && !s.is_attacked(Square(base + 4), them)) {
    auto empty = [&](int idx) { return s.at(Square(base + idx)) == Piece::None; };
    auto safe = [&](int idx) { return !s.is_attacked(Square(base + idx), them); };
    if (king_side && empty(5) && empty(6) && safe(5) && safe(6))
      out.push_back({Square(base + 4), Square(base + 6)});
    if (queen_side && empty(1) && empty(2) && empty(3) && safe(3) && safe(2))
      out.push_back({Square(base + 4), Square(base + 2)});
  }
  return out;
}

}  // namespace

BoardState apply_move_unchecked(const BoardState& state, const MoveCode& m) {
  BoardState s = state;
  auto& sq = s.squares_;
  const Piece moving = sq[m.from.index()];
  const Piece captured = sq[m.to.index()];
  const Color us = s.side_;
  const PieceType type = type_of(moving);

  bool capture = captured != Piece::None;
  sq[m.from.index()] = Piece::None;
  if (type == PieceType::Pawn && s.en_passant_ == m.to && captured == Piece::None &&
      m.from.file() != m.to.file()) {
    const int victim = m.to.index() + (us == Color::White ? -8 : 8);
    sq[victim] = Piece::None;
    capture = true;
  }
  sq[m.to.index()] = m.promotion == Promotion::None ? moving : make_piece(us, promotion_type(m.promotion));

  if (type == PieceType::King && std::abs(m.to.file() - m.from.file()) == 2) {
    const int base = m.from.rank() * 8;
    if (m.to.file() == 6) {
      sq[base + 5] = sq[base + 7];
      sq[base + 7] = Piece::None;
    } else {
      sq[base + 3] = sq[base + 0];
      sq[base + 0] = Piece::None;
    }
  }

  auto touch = [&](int idx) {
    switch (idx) {
      case 0: s.castling_.white_queen = false; break;
      case 7: s.castling_.white_king = false; break;
      case 56: s.castling_.black_queen = false; break;
      case 63: s.castling_.black_king = false; break;
      case 4: s.castling_.white_king = s.castling_.white_queen = false; break;
      case 60: s.castling_.black_king = s.castling_.black_queen = false; break;
      default: break;
    }
  };
  touch(m.from.index());
  touch(m.to.index());

  s.en_passant_.reset();
  if (type == PieceType::Pawn && std::abs(m.to.rank() - m.from.rank()) == 2)
    s.en_passant_ = Square((m.from.index() + m.to.index()) / 2);

  s.halfmove_ = (type == PieceType::Pawn || capture) ? 0 : s.halfmove_ + 1;
  if (us == Color::Black) ++s.fullmove_;
  s.side_ = opposite(us);
  return s;
}

std::vector<MoveCode> legal_moves(const BoardState& state) {
  auto moves = pseudo_legal(state);
  const Color us = state.side_to_move();
  std::vector<MoveCode> legal;
  legal.reserve(moves.size());
  for (const auto& m : moves) {
    const BoardState next = apply_move_unchecked(state, m);
    if (!next.is_attacked(next.king_square(us), opposite(us))) legal.push_back(m);
  }
  std::sort(legal.begin(), legal.end());
  return legal;
}

BoardState apply_move(const BoardState& state, const MoveCode& move) {
  const auto moves = legal_moves(state);
  if (!std::binary_search(moves.begin(), moves.end(), move))
    throw IllegalMoveError("move " + move.uci() + " is not legal in " + to_fen(state));
  return apply_move_unchecked(state, move);
}

bool is_checkmate(const BoardState& s) { return s.in_check() && legal_moves(s).empty(); }
bool is_stalemate(const BoardState& s) { return !s.in_check() && legal_moves(s).empty(); }

bool insufficient_material(const BoardState& s) {
  int minors = 0;
  for (int i = 0; i < 64; ++i) {
    const Piece p = s.at(Square(i));
    if (p == Piece::None) continue;
    switch (type_of(p)) {
      case PieceType::King: break;
      case PieceType::Knight:
      case PieceType::Bishop: ++minors; break;
      default: return false;
    }
  }
  return minors <= 1;
}

std::uint64_t perft(const BoardState& state, int depth) {
  if (depth <= 0) return 1;
  const auto moves = legal_moves(state);
  if (depth == 1) return moves.size();
  std::uint64_t nodes = 0;
  for (const auto& m : moves) nodes += perft(apply_move_unchecked(state, m), depth - 1);
  return nodes;
}

}  // namespace ogss::chess
