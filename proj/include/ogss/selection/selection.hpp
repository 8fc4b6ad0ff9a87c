#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ogss/models/policy.hpp"
#include "ogss/util/rng.hpp"

namespace ogss::selection {

using models::ConfidenceMap;

enum class StrategyKind {
  Random,
  Greedy,
  TopK,
  Temperature,
  EntropyFilter,
  ActionPruning,
  OgssElimination,
  OgssUtility,
  OgssTopKShield,
};

// Kebab-case names used in configs and reports ("top-k", "ogss-utility", ...).
std::string kind_name(StrategyKind kind);
StrategyKind parse_kind(const std::string& name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::Greedy;
  std::optional<int> k;                        // TopK, OgssTopKShield
  std::optional<double> temperature;           // Temperature, > 0
  std::optional<double> surprisal_bits;        // EntropyFilter
  std::optional<double> pruning_threshold;     // ActionPruning, (0, 1)
  std::optional<double> delta;                 // OgssElimination, [0, 1]
  std::optional<double> alpha;                 // OgssUtility, [0, 1]

  static StrategyConfig random();
  static StrategyConfig greedy();
  static StrategyConfig top_k(int k);
  static StrategyConfig with_temperature(double tau);
  static StrategyConfig entropy_filter(double bits);
  static StrategyConfig action_pruning(double threshold = 0.5);
  static StrategyConfig ogss_elimination(double delta = 0.3);
  static StrategyConfig ogss_utility(double alpha = 0.6);
  static StrategyConfig ogss_topk_shield(int k);

  // Throws ConfigError unless exactly the parameters the kind needs are set
  // and within range.
  void validate() const;
  bool needs_risk() const;
  // Stable label, e.g. "top-k(K=5)", "ogss-utility(alpha=0.6)".
  std::string label() const;
};

struct MoveDiagnostics {
  chess::MoveCode move;
  double conf = 0;
  std::optional<double> risk;
  std::optional<double> utility;
};

struct SelectionResult {
  chess::MoveCode move;
  int considered_count = 1;
  bool fallback_used = false;
  std::vector<MoveDiagnostics> diagnostics;  // one row per legal move, map order
};

// Risk(m) for the moves of a confidence map, evaluated on demand and
// memoized. queries() counts distinct moves whose risk was requested.
class RiskSource {
 public:
  using PerMove = std::function<double(const chess::MoveCode&)>;
  using Batch = std::function<std::vector<double>(std::span<const chess::MoveCode>)>;

  // Evaluates one move at a time.
  RiskSource(std::vector<chess::MoveCode> moves, PerMove fn);
  // Evaluates every move in one call on the first request (model-backed
  // risks share one trunk pass); queries() still counts logical requests.
  RiskSource(std::vector<chess::MoveCode> moves, Batch fn);
  // Fixed table, mostly for tests.
  RiskSource(std::vector<chess::MoveCode> moves, std::vector<double> risks);

  double at(std::size_t index);
  bool known(std::size_t index) const { return requested_[index]; }
  std::optional<double> peek(std::size_t index) const;
  std::size_t queries() const { return queries_; }
  std::size_t size() const { return moves_.size(); }

 private:
  std::vector<chess::MoveCode> moves_;
  PerMove per_move_;
  Batch batch_;
  std::vector<double> values_;
  std::vector<bool> computed_;
  std::vector<bool> requested_;
  std::size_t queries_ = 0;
};

// Map indices ordered by descending confidence, ties in canonical move order.
std::vector<std::size_t> rank_by_confidence(const ConfidenceMap& conf);

SelectionResult select_baseline(const StrategyConfig& cfg, const ConfidenceMap& conf, RiskSource* risk, Rng& rng);
SelectionResult select_ogss_elimination(const ConfidenceMap& conf, RiskSource& risk, double delta);
SelectionResult select_ogss_utility(const ConfidenceMap& conf, RiskSource& risk, double alpha);
SelectionResult select_ogss_topk_shield(const ConfidenceMap& conf, RiskSource& risk, int k);

// Dispatches on cfg.kind. risk may be null only for strategies that do not
// need it (ConfigError otherwise).
SelectionResult select(const StrategyConfig& cfg, const ConfidenceMap& conf, RiskSource* risk, Rng& rng);

}  // namespace ogss::selection
