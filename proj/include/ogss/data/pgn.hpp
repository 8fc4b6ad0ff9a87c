#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ogss/chess/board.hpp"

namespace ogss::data {

enum class GameResult { WhiteWin, BlackWin, Draw, Unknown };

std::string result_token(GameResult r);

struct GameRecordRaw {
  std::map<std::string, std::string> tags;
  chess::BoardState start;
  std::vector<chess::MoveCode> moves;
  GameResult result = GameResult::Unknown;
  bool ends_in_checkmate = false;
  // Provenance: source name and zero-based index of the game in it.
  std::string source;
  std::size_t index = 0;
};

// Per-game failure: the game is reported, not dropped.
struct PgnGameError {
  std::size_t index = 0;
  int ply = 0;  // zero-based ply of the offending move; -1 for header problems
  std::string token;
  std::string message;
};

struct PgnEntry {
  std::optional<GameRecordRaw> game;
  std::optional<PgnGameError> error;
};

// Streaming PGN reader. Tags, SAN movetext, result tokens, {} and ;
// comments, NAGs, and () variations (skipped) are understood. A game without
// movetext is still yielded.
class PgnReader {
 public:
  PgnReader(std::istream& in, std::string source);

  // Next game in file order, or nullopt at end of stream.
  std::optional<PgnEntry> next();

 private:
  int peek();
  int get();
  void skip_until(char terminator);
  void skip_variation();
  std::string read_symbol();

  std::istream& in_;
  std::string source_;
  std::size_t game_index_ = 0;
  std::optional<std::string> pending_;  // token read past a game boundary
};

// Reads the whole stream; convenience for tests and small files.
std::vector<PgnEntry> parse_pgn(std::istream& in, const std::string& source = "<stream>");

struct PgnGameOut {
  std::vector<std::pair<std::string, std::string>> tags;  // written in order
  chess::BoardState start = chess::BoardState::startpos();
  std::vector<chess::MoveCode> moves;
  GameResult result = GameResult::Unknown;
};

// Writes one game as PGN (SAN movetext wrapped at 80 columns).
void write_pgn(std::ostream& out, const PgnGameOut& game);

}  // namespace ogss::data
