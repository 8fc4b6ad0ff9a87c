#include "ogss/data/pgn.hpp"

#include <cctype>

#include "ogss/chess/san.hpp"

namespace ogss::data {

namespace {

std::optional<GameResult> parse_result_token(std::string_view s) {
  if (s == "1-0") return GameResult::WhiteWin;
  if (s == "0-1") return GameResult::BlackWin;
  if (s == "1/2-1/2") return GameResult::Draw;
  if (s == "*") return GameResult::Unknown;
  return std::nullopt;
}

bool is_delimiter(int c) {
  return c == EOF || std::isspace(c) || c == '[' || c == ']' || c == '{' || c == '}' || c == '(' ||
         c == ')' || c == ';' || c == '$';
}

const char* san_message(chess::SanStatus s) {
  switch (s) {
    case chess::SanStatus::Malformed: return "malformed SAN";
    case chess::SanStatus::Illegal: return "illegal move";
    case chess::SanStatus::Ambiguous: return "ambiguous SAN";
    default: return "ok";
  }
}

}  // namespace

std::string result_token(GameResult r) {
  switch (r) {
    case GameResult::WhiteWin: return "1-0";
    case GameResult::BlackWin: return "0-1";
    case GameResult::Draw: return "1/2-1/2";
    default: return "*";
  }
}

PgnReader::PgnReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

int PgnReader::peek() { return in_.peek(); }
int PgnReader::get() { return in_.get(); }

void PgnReader::skip_until(char terminator) {
  for (int c = get(); c != EOF && c != terminator; c = get()) {
  }
}

void PgnReader::skip_variation() {
  int depth = 1;
  while (depth > 0) {
    const int c = get();
    if (c == EOF) return;
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == '{') skip_until('}');
    if (c == ';') skip_until('\n');
  }
}

std::string PgnReader::read_symbol() {
  std::string s;
  while (!is_delimiter(peek())) s += static_cast<char>(get());
  return s;
}

std::optional<PgnEntry> PgnReader::next() {
  GameRecordRaw game;
  game.source = source_;
  game.index = game_index_;
  game.start = chess::BoardState::startpos();
  chess::BoardState pos = game.start;

  bool seen_anything = false;
  bool in_movetext = false;
  bool start_ready = false;
  std::optional<PgnGameError> error;
  std::optional<GameResult> terminator;

  auto fail = [&](int ply, std::string token, std::string message) {
    if (!error) error = PgnGameError{game_index_, ply, std::move(token), std::move(message)};
  };
  auto ensure_start = [&] {
    if (start_ready) return;
    start_ready = true;
    if (auto it = game.tags.find("FEN"); it != game.tags.end()) {
      try {
        game.start = chess::parse_fen(it->second);
        pos = game.start;
      } catch (const chess::FenError& e) {
        fail(-1, it->second, e.what());
      }
    }
  };

  for (;;) {
    while (std::isspace(peek())) get();
    const int c = peek();
    if (c == EOF) break;
    if (c == '[') {
      if (in_movetext) break;  // next game starts; this one had no result token
      get();
      seen_anything = true;
      std::string key;
      while (!std::isspace(peek()) && peek() != '"' && peek() != ']' && peek() != EOF)
        key += static_cast<char>(get());
      while (std::isspace(peek())) get();
      std::string value;
      if (get() != '"') {
        fail(-1, key, "malformed tag");
        skip_until(']');
        continue;
      }
      for (int v = get(); v != EOF && v != '"'; v = get()) {
        if (v == '\\' && (peek() == '"' || peek() == '\\')) v = get();
        value += static_cast<char>(v);
      }
      skip_until(']');
      game.tags[key] = value;
      continue;
    }
    if (c == '{') {
      skip_until('}');
      continue;
    }
    if (c == ';' || c == '%') {
      skip_until('\n');
      continue;
    }
    if (c == '(') {
      get();
      skip_variation();
      continue;
    }
    if (c == ')' || c == ']' || c == '}') {
      get();
      continue;
    }
    if (c == '$') {
      get();
      while (std::isdigit(peek())) get();
      continue;
    }

    std::string token = read_symbol();
    seen_anything = true;
    if (auto r = parse_result_token(token)) {
      terminator = r;
      break;
    }
    std::size_t digits = 0;
    while (digits < token.size() && std::isdigit(static_cast<unsigned char>(token[digits]))) ++digits;
    if (digits > 0 && digits < token.size() && token[digits] == '.') {
      std::size_t cut = digits;
      while (cut < token.size() && token[cut] == '.') ++cut;
      token = token.substr(cut);
    }
    if (token.empty()) continue;

    in_movetext = true;
    ensure_start();
    if (error) continue;
    const auto san = chess::parse_san(pos, token);
    if (san.status != chess::SanStatus::Ok) {
      fail(static_cast<int>(game.moves.size()), token, san_message(san.status));
      continue;
    }
    game.moves.push_back(san.move);
    pos = chess::apply_move_unchecked(pos, san.move);
  }

  if (!seen_anything) return std::nullopt;
  ensure_start();
  ++game_index_;

  PgnEntry entry;
  if (error) {
    entry.error = std::move(error);
    return entry;
  }
  game.result = GameResult::Unknown;
  if (auto it = game.tags.find("Result"); it != game.tags.end()) {
    if (auto r = parse_result_token(it->second)) game.result = *r;
  }
  if (game.result == GameResult::Unknown && terminator) game.result = *terminator;
  if (chess::is_checkmate(pos)) {
    game.ends_in_checkmate = true;
    game.result = pos.side_to_move() == chess::Color::White ? GameResult::BlackWin
                                                            : GameResult::WhiteWin;
  }
  entry.game = std::move(game);
  return entry;
}

std::vector<PgnEntry> parse_pgn(std::istream& in, const std::string& source) {
  PgnReader reader(in, source);
  std::vector<PgnEntry> out;
  while (auto e = reader.next()) out.push_back(std::move(*e));
  return out;
}

void write_pgn(std::ostream& out, const PgnGameOut& game) {
  bool has_result = false;
  for (const auto& [k, v] : game.tags) {
    out << '[' << k << " \"" << v << "\"]\n";
    if (k == "Result") has_result = true;
  }
  if (!has_result) out << "[Result \"" << result_token(game.result) << "\"]\n";
  const std::string start_fen = chess::to_fen(game.start);
  if (start_fen != chess::kStartFen) {
    out << "[SetUp \"1\"]\n[FEN \"" << start_fen << "\"]\n";
  }
  out << '\n';

  std::string line;
  auto emit = [&](const std::string& word) {
    if (!line.empty() && line.size() + 1 + word.size() > 80) {
      out << line << '\n';
      line.clear();
    }
    if (!line.empty()) line += ' ';
    line += word;
  };
  chess::BoardState pos = game.start;
  for (std::size_t i = 0; i < game.moves.size(); ++i) {
    const bool white = pos.side_to_move() == chess::Color::White;
    if (white) {
      emit(std::to_string(pos.fullmove_number()) + ".");
    } else if (i == 0) {
      emit(std::to_string(pos.fullmove_number()) + "...");
    }
    emit(chess::to_san(pos, game.moves[i]));
    pos = chess::apply_move_unchecked(pos, game.moves[i]);
  }
  emit(result_token(game.result));
  out << line << "\n\n";
}

}  // namespace ogss::data
