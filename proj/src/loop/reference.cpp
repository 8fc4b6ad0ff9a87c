#include "ogss/loop/reference.hpp"

#include <map>

#include "ogss/util/rng.hpp"

namespace ogss::loop {

std::vector<data::GameRecordRaw> generate_reference_games(oracle::Oracle& oracle, std::size_t n, std::uint64_t seed,
                                                          const ReferenceOptions& opts) {
  if (opts.max_plies < 1 || opts.opening_plies < 0 || !(opts.noise >= 0.0 && opts.noise <= 1.0))
    throw ConfigError("learning_loop", "generate_reference_games", "bad options");
  opts.limits.validate();
  std::vector<data::GameRecordRaw> games;
  games.reserve(n);
  for (std::size_t g = 0; g < n; ++g) {
    Rng rng(Rng::derive(seed, g));
    data::GameRecordRaw rec;
    rec.source = "reference";
    rec.index = g;
    chess::BoardState state = chess::BoardState::startpos();
    rec.start = state;
    std::map<std::string, int> seen;
    ++seen[state.repetition_key()];
    oracle.new_game();
    for (int ply = 0;; ++ply) {
      const auto legal = chess::legal_moves(state);
      if (legal.empty()) {
        if (state.in_check()) {
          rec.ends_in_checkmate = true;
          rec.result = state.side_to_move() == chess::Color::White ? data::GameResult::BlackWin
                                                                   : data::GameResult::WhiteWin;
        } else {
          rec.result = data::GameResult::Draw;
        }
        break;
      }
      if (state.halfmove_clock() >= 100 || seen[state.repetition_key()] >= 3 || chess::insufficient_material(state)) {
        rec.result = data::GameResult::Draw;
        break;
      }
      if (ply >= opts.max_plies) break;
      chess::MoveCode m;
      if (ply < opts.opening_plies || rng.uniform01() < opts.noise)
        m = legal[rng.uniform_index(legal.size())];
      else
        m = oracle::best_move(oracle, state, opts.limits);
      rec.moves.push_back(m);
      state = chess::apply_move(state, m);
      ++seen[state.repetition_key()];
    }
    rec.tags = {{"Event", "reference"},
                {"Round", std::to_string(g)},
                {"White", oracle.identity()},
                {"Black", oracle.identity()},
                {"Result", data::result_token(rec.result)}};
    games.push_back(std::move(rec));
  }
  return games;
}

}  // namespace ogss::loop
