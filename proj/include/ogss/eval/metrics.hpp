#pragma once

#include <array>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "ogss/loop/game.hpp"

namespace ogss::eval {

inline constexpr int kGoodMoveThreshold = 50;

struct MoveAnnotation {
  std::size_t ply = 0;
  int cp_drop = 0;
  bool is_blunder = false;  // drop >= 100
  bool is_good = false;     // drop < 50
  int considered_count = 1;
  int legal_count = 1;
};

// One annotation per agent ply. Throws Error naming the ply when a label or
// selection is missing.
std::vector<MoveAnnotation> annotate_game(const loop::GameRecord& record,
                                          int blunder_threshold = oracle::kDefaultBlunderThreshold);

enum class Metric { BlunderRate, GoodMoveRate, MedianCpDrop, ExplorationRatio };
inline constexpr std::array<Metric, 4> kMetrics = {Metric::BlunderRate, Metric::GoodMoveRate, Metric::MedianCpDrop,
                                                   Metric::ExplorationRatio};
// "blunder_rate", "good_move_rate", "median_cp_drop", "exploration_ratio".
std::string metric_name(Metric m);

struct GameMetrics {
  std::size_t game_index = 0;
  std::uint64_t seed = 0;
  std::size_t n_agent_moves = 0;
  double blunder_rate = 0;
  double good_move_rate = 0;
  double median_cp_drop = 0;
  double exploration_ratio = 0;

  double get(Metric m) const;
  bool operator==(const GameMetrics&) const = default;
};

// Throws Error when there are no annotations.
GameMetrics game_metrics(std::span<const MoveAnnotation> moves);

// Games without agent moves are skipped.
std::vector<GameMetrics> compute_metrics(std::span<const loop::GameRecord> records,
                                         int blunder_threshold = oracle::kDefaultBlunderThreshold);

// Same metrics straight from archive lines, without building GameRecords.
std::vector<GameMetrics> recompute_from_archive(std::istream& archive,
                                                int blunder_threshold = oracle::kDefaultBlunderThreshold);

}  // namespace ogss::eval
