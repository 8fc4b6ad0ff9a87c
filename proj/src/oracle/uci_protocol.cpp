#include "ogss/oracle/uci_protocol.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

namespace ogss::oracle {

namespace {

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::optional<int> to_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<CentipawnScore> parse_info_score(std::string_view line) {
  const auto tokens = tokens_of(line);
  if (tokens.empty() || tokens[0] != "info") return std::nullopt;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i] == "string" || tokens[i] == "pv") return std::nullopt;
    if (tokens[i] != "score") continue;
    if (i + 2 >= tokens.size()) return std::nullopt;
    const auto value = to_int(tokens[i + 2]);
    if (!value) return std::nullopt;
    if (tokens[i + 1] == "cp") return CentipawnScore{std::clamp(*value, -kMateScore, kMateScore), false};
    if (tokens[i + 1] == "mate") return CentipawnScore{map_mate(*value), true};
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> parse_bestmove(std::string_view line) {
  const auto tokens = tokens_of(line);
  if (tokens.size() < 2 || tokens[0] != "bestmove") return std::nullopt;
  return std::string(tokens[1]);
}

bool SearchTranscript::feed(std::string_view line) {
  if (done()) return true;
  if (auto best = parse_bestmove(line)) {
    bestmove_ = std::move(best);
    return true;
  }
  if (auto s = parse_info_score(line)) score_ = s;
  return false;
}

SearchResult SearchTranscript::result(const chess::BoardState& state) const {
  if (!bestmove_)
    throw OracleError(OracleError::Kind::Desync, "search", "no bestmove received");
  SearchResult r;
  if (*bestmove_ == "(none)" || *bestmove_ == "0000") {
    r.score = score_.value_or(state.in_check() ? CentipawnScore{-kMateScore, true}
                                               : CentipawnScore{0, false});
    return r;
  }
  if (!score_)
    throw OracleError(OracleError::Kind::Protocol, "search", "bestmove without any score line");
  const auto move = chess::MoveCode::parse_uci(*bestmove_);
  const auto legal = chess::legal_moves(state);
  if (!move || !std::binary_search(legal.begin(), legal.end(), *move))
    throw OracleError(OracleError::Kind::Protocol, "search",
                      "bestmove '" + *bestmove_ + "' is not legal in " + chess::to_fen(state));
  r.score = *score_;
  r.best_move = *move;
  return r;
}

}  // namespace ogss::oracle
