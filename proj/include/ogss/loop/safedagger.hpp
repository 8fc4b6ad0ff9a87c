#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ogss/data/dataset.hpp"
#include "ogss/loop/game.hpp"
#include "ogss/models/blunder.hpp"
#include "ogss/models/policy.hpp"

namespace ogss::loop {

struct BlunderBuildStats {
  std::size_t flagged = 0;        // agent plies with is_blunder
  std::size_t contradictory = 0;  // correction == played move; pair dropped
  std::size_t duplicates = 0;     // examples dropped as exact repeats
};

// Each flagged agent ply yields (state, played, 1) and (state, correction, 0);
// repeats of an identical (FEN, move, label) are kept once.
models::BlunderDataset build_blunder_dataset(std::span<const GameRecord> records, BlunderBuildStats* stats = nullptr);

// (state, correction) for every flagged agent ply, in record order.
data::PolicyDataset correction_pairs(std::span<const GameRecord> records, int round);

struct RoundConfig {
  int round = 0;
  std::size_t n_games = 1;
  std::uint64_t seed = 1;
  int jobs = 1;
  selection::StrategyConfig strategy = selection::StrategyConfig::top_k(5);
  RiskMode risk_mode = RiskMode::Model;
  GameOptions game;
  models::TrainingConfig training;
  // Continue from the incoming weights; otherwise retrain from scratch.
  bool warm_start = true;

  void validate() const;
};

struct RoundResult {
  int round = 0;
  models::PolicyModel policy;
  models::BlunderDataset blunder_ds;
  data::PolicyDataset aggregate;
  std::vector<GameRecord> games;
  std::vector<double> policy_loss;
  BlunderBuildStats stats;
};

// Plays cfg.n_games, grows the aggregate by the flagged blunders'
// corrections and retrains the policy on it.
RoundResult safedagger_round(const models::PolicyModel& policy, const models::BlunderModel* blunder,
                             const data::PolicyDataset& aggregate, const RoundConfig& cfg,
                             const oracle::OracleFactory& opponent, const oracle::OracleFactory& labeler);

// Writes <dir>/round-<r>/{games.jsonl, games.pgn, blunders.tsv, aggregate.tsv, policy.ckpt}.
std::filesystem::path save_round(const std::filesystem::path& dir, const RoundResult& result);

}  // namespace ogss::loop
