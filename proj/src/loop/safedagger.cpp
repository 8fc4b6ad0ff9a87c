#include "ogss/loop/safedagger.hpp"

#include <fstream>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "ogss/loop/archive.hpp"
#include "ogss/models/checkpoint.hpp"

namespace ogss::loop {

models::BlunderDataset build_blunder_dataset(std::span<const GameRecord> records, BlunderBuildStats* stats) {
  models::BlunderDataset ds;
  BlunderBuildStats st;
  std::set<std::tuple<std::string, chess::MoveCode, int>> seen;
  auto add = [&](const chess::BoardState& s, const chess::MoveCode& m, int label, const std::string& prov) {
    if (!seen.emplace(chess::to_fen(s), m, label).second) {
      ++st.duplicates;
      return;
    }
    ds.examples.push_back({s, m, label, prov});
  };
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.plies.size(); ++i) {
      const auto& p = r.plies[i];
      if (!p.agent || !p.label || !p.label->is_blunder) continue;
      ++st.flagged;
      if (!p.label->correction || *p.label->correction == p.played) {
        ++st.contradictory;
        spdlog::debug("learning_loop: game {} ply {}: oracle correction equals the flagged move {}; pair dropped",
                     r.index, i, p.played.uci());
        continue;
      }
      const std::string prov = "game " + std::to_string(r.index) + " ply " + std::to_string(i);
      add(p.before, p.played, 1, prov);
      add(p.before, *p.label->correction, 0, prov);
    }
  }
  if (st.contradictory > 0)
    spdlog::warn("learning_loop: {} of {} flagged moves had the played move as their correction; pairs dropped",
                 st.contradictory, st.flagged);
  if (stats) *stats = st;
  return ds;
}

data::PolicyDataset correction_pairs(std::span<const GameRecord> records, int round) {
  data::PolicyDataset out;
  for (const auto& r : records)
    for (const auto& p : r.plies)
      if (p.agent && p.label && p.label->is_blunder && p.label->correction)
        out.pairs.push_back({p.before, *p.label->correction, {"round-" + std::to_string(round) + "-correction", r.index}});
  return out;
}

void RoundConfig::validate() const {
  if (n_games < 1) throw ConfigError("learning_loop", "safedagger_round", "n_games must be >= 1");
  if (jobs < 1) throw ConfigError("learning_loop", "safedagger_round", "jobs must be >= 1");
  if (round < 0) throw ConfigError("learning_loop", "safedagger_round", "round must be >= 0");
  strategy.validate();
  game.validate();
  training.validate();
}

RoundResult safedagger_round(const models::PolicyModel& policy, const models::BlunderModel* blunder,
                             const data::PolicyDataset& aggregate, const RoundConfig& cfg,
                             const oracle::OracleFactory& opponent, const oracle::OracleFactory& labeler) {
  cfg.validate();
  Agent agent{&policy, blunder, cfg.risk_mode, cfg.strategy};
  RoundResult res{cfg.round, policy, {}, aggregate, {}, {}, {}};
  res.games = play_games(agent, opponent, labeler, cfg.game, cfg.n_games, cfg.seed, cfg.jobs);
  for (const auto& g : res.games)
    if (g.error) spdlog::warn("learning_loop: round {} game {} is partial: {}", cfg.round, g.index, *g.error);

  res.blunder_ds = build_blunder_dataset(res.games, &res.stats);
  const auto extra = correction_pairs(res.games, cfg.round);
  res.aggregate.pairs.insert(res.aggregate.pairs.end(), extra.pairs.begin(), extra.pairs.end());
  spdlog::info("learning_loop: round {}: {} games, {} flagged blunders, aggregate {} -> {} pairs", cfg.round,
               res.games.size(), res.stats.flagged, aggregate.size(), res.aggregate.size());

  if (!res.aggregate.empty()) {
    auto trained = cfg.warm_start ? models::train_policy(policy, res.aggregate, cfg.training)
                                  : models::train_policy(res.aggregate, cfg.training, policy.arch());
    res.policy = std::move(trained.model);
    res.policy_loss = std::move(trained.loss_curve);
  }
  return res;
}

std::filesystem::path save_round(const std::filesystem::path& dir, const RoundResult& result) {
  const auto out = dir / ("round-" + std::to_string(result.round));
  std::filesystem::create_directories(out);
  save_archive(out / "games.jsonl", result.games);
  {
    std::ofstream pgn(out / "games.pgn", std::ios::binary);
    if (!pgn) throw Error("learning_loop", "save_round", "cannot write " + (out / "games.pgn").string());
    write_pgn_export(pgn, result.games);
  }
  models::save_blunder_dataset(out / "blunders.tsv", result.blunder_ds);
  data::save_dataset(out / "aggregate.tsv", result.aggregate);
  models::save_checkpoint(result.policy, out / "policy.ckpt");
  return out;
}

}  // namespace ogss::loop
