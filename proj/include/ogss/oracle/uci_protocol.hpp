#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ogss/oracle/oracle.hpp"

namespace ogss::oracle {

// Score carried by an "info" line, if any. "info string ..." text is never
// interpreted; tokens after "pv" are moves and are not scanned. cp values are
// clamped to +-10000; "mate k" maps through map_mate().
std::optional<CentipawnScore> parse_info_score(std::string_view line);

// Move token of a "bestmove" line ("e2e4", "(none)"), nullopt for other lines.
std::optional<std::string> parse_bestmove(std::string_view line);

// Collects the inbound lines of one "go" command.
class SearchTranscript {
 public:
  // Returns true once the bestmove line has been seen; later lines are ignored.
  bool feed(std::string_view line);

  bool done() const { return bestmove_.has_value(); }
  const std::optional<CentipawnScore>& score() const { return score_; }
  const std::optional<std::string>& bestmove_token() const { return bestmove_; }

  // Validates against the searched position: a score must have been seen and
  // the best move must be legal ("(none)" yields no move).
  SearchResult result(const chess::BoardState& state) const;

 private:
  std::optional<CentipawnScore> score_;
  std::optional<std::string> bestmove_;
};

}  // namespace ogss::oracle
