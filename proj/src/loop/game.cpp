#include "ogss/loop/game.hpp"

#include <exception>
#include <map>
#include <memory>

#include <spdlog/spdlog.h>

namespace ogss::loop {

namespace {

constexpr std::pair<Outcome, const char*> kOutcomes[] = {
    {Outcome::AgentWin, "agent-win"},
    {Outcome::AgentLoss, "agent-loss"},
    {Outcome::Draw, "draw"},
    {Outcome::Adjudicated, "adjudicated"},
};

constexpr std::pair<Termination, const char*> kTerminations[] = {
    {Termination::Checkmate, "checkmate"},         {Termination::Stalemate, "stalemate"},
    {Termination::FiftyMove, "fifty-move"},        {Termination::Threefold, "threefold"},
    {Termination::InsufficientMaterial, "insufficient-material"},
    {Termination::MaxPlies, "max-plies"},          {Termination::Error, "error"},
};

double truth_risk(oracle::Oracle& labeler, const chess::BoardState& state, const chess::MoveCode& move,
                  const GameOptions& opts) {
  return oracle::label_move(labeler, state, move, opts.label_limits, opts.blunder_threshold).is_blunder ? 1.0 : 0.0;
}

}  // namespace

std::string to_string(Outcome o) {
  for (const auto& [k, name] : kOutcomes)
    if (k == o) return name;
  return "?";
}

std::string to_string(Termination t) {
  for (const auto& [k, name] : kTerminations)
    if (k == t) return name;
  return "?";
}

Outcome parse_outcome(const std::string& text) {
  for (const auto& [k, name] : kOutcomes)
    if (text == name) return k;
  throw Error("learning_loop", "read_archive", "unknown outcome '" + text + "'");
}

Termination parse_termination(const std::string& text) {
  for (const auto& [k, name] : kTerminations)
    if (text == name) return k;
  throw Error("learning_loop", "read_archive", "unknown termination '" + text + "'");
}

std::size_t GameRecord::agent_moves() const {
  std::size_t n = 0;
  for (const auto& p : plies) n += p.agent;
  return n;
}

std::size_t GameRecord::blunders() const {
  std::size_t n = 0;
  for (const auto& p : plies) n += p.label && p.label->is_blunder;
  return n;
}

void GameOptions::validate() const {
  if (max_plies < 1) throw ConfigError("learning_loop", "play_game", "max_plies must be >= 1");
  if (opening_plies < 0) throw ConfigError("learning_loop", "play_game", "opening_plies must be >= 0");
  opponent_limits.validate();
  label_limits.validate();
}

chess::Color agent_color_for(std::size_t game_index) {
  return game_index % 2 == 1 ? chess::Color::White : chess::Color::Black;
}

std::uint64_t game_seed(std::uint64_t run_seed, std::size_t index) { return Rng::derive(run_seed, index); }

GameRecord play_game(const Agent& agent, oracle::Oracle& opponent, oracle::Oracle& labeler, const GameOptions& opts,
                     std::size_t game_index, std::uint64_t seed) {
  opts.validate();
  agent.strategy.validate();
  if (!agent.policy) throw ConfigError("learning_loop", "play_game", "agent has no policy model");
  if (agent.strategy.needs_risk() && agent.risk_mode == RiskMode::Model && !agent.blunder)
    throw ConfigError("learning_loop", "play_game",
                      agent.strategy.label() + " needs a blunder model (or oracle-truth risk)");

  GameRecord rec;
  rec.index = game_index;
  rec.seed = seed;
  rec.strategy = agent.strategy.label();
  rec.agent_color = agent_color_for(game_index);

  Rng opening(Rng::derive(seed, 1));
  chess::BoardState state = chess::BoardState::startpos();
  for (int i = 0; i < opts.opening_plies; ++i) {
    const auto legal = chess::legal_moves(state);
    if (legal.empty()) break;
    const auto next = chess::apply_move_unchecked(state, legal[opening.uniform_index(legal.size())]);
    if (chess::legal_moves(next).empty()) break;  // never start from a finished game
    state = next;
  }
  rec.start = state;

  Rng rng(Rng::derive(seed, 2));
  std::map<std::string, int> seen;
  ++seen[state.repetition_key()];

  try {
    opponent.new_game();
    labeler.new_game();
    while (true) {
      const auto legal = chess::legal_moves(state);
      if (legal.empty()) {
        if (state.in_check()) {
          rec.termination = Termination::Checkmate;
          rec.outcome = state.side_to_move() == rec.agent_color ? Outcome::AgentLoss : Outcome::AgentWin;
        } else {
          rec.termination = Termination::Stalemate;
          rec.outcome = Outcome::Draw;
        }
        break;
      }
      if (state.halfmove_clock() >= 100) {
        rec.termination = Termination::FiftyMove;
        rec.outcome = Outcome::Draw;
        break;
      }
      if (seen[state.repetition_key()] >= 3) {
        rec.termination = Termination::Threefold;
        rec.outcome = Outcome::Draw;
        break;
      }
      if (chess::insufficient_material(state)) {
        rec.termination = Termination::InsufficientMaterial;
        rec.outcome = Outcome::Draw;
        break;
      }
      if (static_cast<int>(rec.plies.size()) >= opts.max_plies) {
        rec.termination = Termination::MaxPlies;
        rec.outcome = Outcome::Adjudicated;
        const int score = oracle::evaluate(labeler, state, opts.label_limits).value;
        rec.final_eval = state.side_to_move() == rec.agent_color ? score : -score;
        break;
      }

      Ply ply;
      ply.before = state;
      if (state.side_to_move() == rec.agent_color) {
        ply.agent = true;
        const auto conf = models::policy_confidences(*agent.policy, state);
        std::optional<selection::RiskSource> risk;
        if (agent.strategy.needs_risk()) {
          if (agent.risk_mode == RiskMode::Model) {
            risk.emplace(conf.moves, selection::RiskSource::Batch([&](std::span<const chess::MoveCode> ms) {
                           return models::blunder_risks(*agent.blunder, state, ms);
                         }));
          } else {
            risk.emplace(conf.moves, selection::RiskSource::PerMove([&](const chess::MoveCode& m) {
                           return truth_risk(labeler, state, m, opts);
                         }));
          }
        }
        auto sel = selection::select(agent.strategy, conf, risk ? &*risk : nullptr, rng);
        ply.played = sel.move;
        ply.selection = std::move(sel);
        ply.label = oracle::label_move(labeler, state, ply.played, opts.label_limits, opts.blunder_threshold);
      } else {
        ply.played = oracle::best_move(opponent, state, opts.opponent_limits);
      }
      state = chess::apply_move(state, ply.played);
      rec.plies.push_back(std::move(ply));
      ++seen[state.repetition_key()];
    }
  } catch (const Error& e) {
    rec.termination = Termination::Error;
    rec.outcome = Outcome::Adjudicated;
    rec.error = e.what();
    spdlog::warn("learning_loop: game {} stopped after {} plies: {}", game_index, rec.plies.size(), e.what());
  }
  return rec;
}

std::vector<GameRecord> play_games(const Agent& agent, const oracle::OracleFactory& opponent,
                                   const oracle::OracleFactory& labeler, const GameOptions& opts, std::size_t n,
                                   std::uint64_t run_seed, int jobs) {
  if (jobs < 1) throw ConfigError("learning_loop", "play_games", "jobs must be >= 1");
  opts.validate();
  std::vector<GameRecord> out(n);
  std::exception_ptr failure;
  const long count = static_cast<long>(n);
#pragma omp parallel num_threads(jobs)
  {
    std::unique_ptr<oracle::Oracle> opp;
    std::unique_ptr<oracle::Oracle> lab;
#pragma omp for schedule(dynamic, 1)
    for (long i = 0; i < count; ++i) {
      try {
        if (!opp) opp = opponent();
        if (!lab) lab = labeler();
        out[static_cast<std::size_t>(i)] =
            play_game(agent, *opp, *lab, opts, static_cast<std::size_t>(i), game_seed(run_seed, static_cast<std::size_t>(i)));
      } catch (...) {
#pragma omp critical(ogss_play_games)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

void verify_replay(const GameRecord& record) {
  chess::BoardState state = record.start;
  for (std::size_t i = 0; i < record.plies.size(); ++i) {
    if (!(record.plies[i].before == state))
      throw Error("learning_loop", "verify_replay", "ply " + std::to_string(i) + ": stored position differs");
    state = chess::apply_move(state, record.plies[i].played);
  }
}

}  // namespace ogss::loop
