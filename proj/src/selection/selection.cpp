#include "ogss/selection/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace ogss::selection {

namespace {

struct KindName {
  StrategyKind kind;
  const char* name;
};

constexpr KindName kNames[] = {
    {StrategyKind::Random, "random"},
    {StrategyKind::Greedy, "greedy"},
    {StrategyKind::TopK, "top-k"},
    {StrategyKind::Temperature, "temperature"},
    {StrategyKind::EntropyFilter, "entropy-filter"},
    {StrategyKind::ActionPruning, "action-pruning"},
    {StrategyKind::OgssElimination, "ogss-elimination"},
    {StrategyKind::OgssUtility, "ogss-utility"},
    {StrategyKind::OgssTopKShield, "ogss-topk-shield"},
};

[[noreturn]] void config_error(const std::string& message) {
  throw ConfigError("selection", "strategy_config", message);
}

std::vector<MoveDiagnostics> base_diagnostics(const ConfidenceMap& conf) {
  std::vector<MoveDiagnostics> d(conf.size());
  for (std::size_t i = 0; i < conf.size(); ++i) {
    d[i].move = conf.moves[i];
    d[i].conf = conf.conf[i];
  }
  return d;
}

void attach_risks(std::vector<MoveDiagnostics>& d, const RiskSource& risk) {
  for (std::size_t i = 0; i < d.size(); ++i) d[i].risk = risk.peek(i);
}

SelectionResult result(const ConfidenceMap& conf, std::size_t index, std::size_t considered, bool fallback,
                       std::vector<MoveDiagnostics> diagnostics) {
  SelectionResult r;
  r.move = conf.moves[index];
  r.considered_count = static_cast<int>(considered);
  r.fallback_used = fallback;
  r.diagnostics = std::move(diagnostics);
  return r;
}

void require_nonempty(const ConfidenceMap& conf) {
  if (conf.size() == 0) throw Error("selection", "select", "empty legal move set");
}

std::size_t uniform_pick(const std::vector<std::size_t>& pool, Rng& rng) {
  return pool[static_cast<std::size_t>(rng.uniform_index(pool.size()))];
}

StrategyConfig of(StrategyKind kind) {
  StrategyConfig c;
  c.kind = kind;
  return c;
}

}  // namespace

std::string kind_name(StrategyKind kind) {
  for (const auto& kn : kNames)
    if (kn.kind == kind) return kn.name;
  return "greedy";
}

StrategyKind parse_kind(const std::string& name) {
  for (const auto& kn : kNames)
    if (name == kn.name) return kn.kind;
  config_error("unknown strategy '" + name + "'");
}

StrategyConfig StrategyConfig::random() { return of(StrategyKind::Random); }
StrategyConfig StrategyConfig::greedy() { return of(StrategyKind::Greedy); }
StrategyConfig StrategyConfig::top_k(int k) {
  auto c = of(StrategyKind::TopK);
  c.k = k;
  return c;
}
StrategyConfig StrategyConfig::with_temperature(double tau) {
  auto c = of(StrategyKind::Temperature);
  c.temperature = tau;
  return c;
}
StrategyConfig StrategyConfig::entropy_filter(double bits) {
  auto c = of(StrategyKind::EntropyFilter);
  c.surprisal_bits = bits;
  return c;
}
StrategyConfig StrategyConfig::action_pruning(double threshold) {
  auto c = of(StrategyKind::ActionPruning);
  c.pruning_threshold = threshold;
  return c;
}
StrategyConfig StrategyConfig::ogss_elimination(double delta) {
  auto c = of(StrategyKind::OgssElimination);
  c.delta = delta;
  return c;
}
StrategyConfig StrategyConfig::ogss_utility(double alpha) {
  auto c = of(StrategyKind::OgssUtility);
  c.alpha = alpha;
  return c;
}
StrategyConfig StrategyConfig::ogss_topk_shield(int k) {
  auto c = of(StrategyKind::OgssTopKShield);
  c.k = k;
  return c;
}

void StrategyConfig::validate() const {
  const bool wants_k = kind == StrategyKind::TopK || kind == StrategyKind::OgssTopKShield;
  const auto check = [&](bool present, bool wanted, const char* param) {
    if (present && !wanted) config_error(std::string(param) + " does not apply to " + kind_name(kind));
    if (!present && wanted) config_error(kind_name(kind) + " requires " + param);
  };
  check(k.has_value(), wants_k, "K");
  check(temperature.has_value(), kind == StrategyKind::Temperature, "temperature");
  check(surprisal_bits.has_value(), kind == StrategyKind::EntropyFilter, "surprisal threshold");
  check(pruning_threshold.has_value(), kind == StrategyKind::ActionPruning, "pruning threshold");
  check(delta.has_value(), kind == StrategyKind::OgssElimination, "delta");
  check(alpha.has_value(), kind == StrategyKind::OgssUtility, "alpha");
  if (k && *k < 1) config_error("K must be >= 1");
  if (temperature && !(*temperature > 0 && std::isfinite(*temperature))) config_error("temperature must be > 0");
  if (surprisal_bits && !(*surprisal_bits >= 0)) config_error("surprisal threshold must be >= 0");
  if (pruning_threshold && !(*pruning_threshold > 0 && *pruning_threshold < 1))
    config_error("pruning threshold must be in (0, 1)");
  if (delta && !(*delta >= 0 && *delta <= 1)) config_error("delta must be in [0, 1]");
  if (alpha && !(*alpha >= 0 && *alpha <= 1)) config_error("alpha must be in [0, 1]");
}

bool StrategyConfig::needs_risk() const {
  return kind == StrategyKind::ActionPruning || kind == StrategyKind::OgssElimination ||
         kind == StrategyKind::OgssUtility || kind == StrategyKind::OgssTopKShield;
}

std::string StrategyConfig::label() const {
  std::string s = kind_name(kind);
  if (k) return s + fmt::format("(K={})", *k);
  if (temperature) return s + fmt::format("(tau={})", *temperature);
  if (surprisal_bits) return s + fmt::format("(bits={})", *surprisal_bits);
  if (pruning_threshold) return s + fmt::format("(threshold={})", *pruning_threshold);
  if (delta) return s + fmt::format("(delta={})", *delta);
  if (alpha) return s + fmt::format("(alpha={})", *alpha);
  return s;
}

RiskSource::RiskSource(std::vector<chess::MoveCode> moves, PerMove fn)
    : moves_(std::move(moves)),
      per_move_(std::move(fn)),
      values_(moves_.size()),
      computed_(moves_.size()),
      requested_(moves_.size()) {}

RiskSource::RiskSource(std::vector<chess::MoveCode> moves, Batch fn)
    : moves_(std::move(moves)),
      batch_(std::move(fn)),
      values_(moves_.size()),
      computed_(moves_.size()),
      requested_(moves_.size()) {}

RiskSource::RiskSource(std::vector<chess::MoveCode> moves, std::vector<double> risks)
    : moves_(std::move(moves)),
      values_(std::move(risks)),
      computed_(moves_.size(), true),
      requested_(moves_.size()) {
  if (values_.size() != moves_.size()) throw Error("selection", "risk_source", "one risk per move required");
}

double RiskSource::at(std::size_t index) {
  if (!computed_[index]) {
    if (batch_) {
      values_ = batch_(moves_);
      if (values_.size() != moves_.size()) throw Error("selection", "risk_source", "batch returned wrong size");
      std::fill(computed_.begin(), computed_.end(), true);
    } else {
      values_[index] = per_move_(moves_[index]);
      computed_[index] = true;
    }
  }
  if (!requested_[index]) {
    requested_[index] = true;
    ++queries_;
  }
  return values_[index];
}

std::optional<double> RiskSource::peek(std::size_t index) const {
  if (!requested_[index]) return std::nullopt;
  return values_[index];
}

std::vector<std::size_t> rank_by_confidence(const ConfidenceMap& conf) {
  std::vector<std::size_t> idx(conf.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (conf.conf[a] != conf.conf[b]) return conf.conf[a] > conf.conf[b];
    return conf.moves[a] < conf.moves[b];
  });
  return idx;
}

SelectionResult select_baseline(const StrategyConfig& cfg, const ConfidenceMap& conf, RiskSource* risk, Rng& rng) {
  cfg.validate();
  require_nonempty(conf);
  const std::size_t n = conf.size();
  auto diag = base_diagnostics(conf);
  switch (cfg.kind) {
    case StrategyKind::Random:
      return result(conf, static_cast<std::size_t>(rng.uniform_index(n)), n, false, std::move(diag));
    case StrategyKind::Greedy:
      return result(conf, rank_by_confidence(conf).front(), 1, false, std::move(diag));
    case StrategyKind::TopK: {
      const auto ranked = rank_by_confidence(conf);
      const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(*cfg.k), n);
      std::vector<double> w(k);
      for (std::size_t i = 0; i < k; ++i) w[i] = conf.conf[ranked[i]];
      return result(conf, ranked[rng.weighted_index(w)], k, false, std::move(diag));
    }
    case StrategyKind::Temperature: {
      // Conf^(1/tau), scaled by the largest confidence to stay finite.
      const double top = *std::max_element(conf.conf.begin(), conf.conf.end());
      std::vector<double> w(n, 0.0);
      if (top > 0)
        for (std::size_t i = 0; i < n; ++i)
          if (conf.conf[i] > 0) w[i] = std::exp((std::log(conf.conf[i]) - std::log(top)) / *cfg.temperature);
      return result(conf, rng.weighted_index(w), n, false, std::move(diag));
    }
    case StrategyKind::EntropyFilter: {
      std::vector<std::size_t> kept;
      for (std::size_t i = 0; i < n; ++i)
        if (conf.conf[i] > 0 && -std::log2(conf.conf[i]) <= *cfg.surprisal_bits) kept.push_back(i);
      if (kept.empty()) return result(conf, rank_by_confidence(conf).front(), 1, true, std::move(diag));
      return result(conf, uniform_pick(kept, rng), kept.size(), false, std::move(diag));
    }
    case StrategyKind::ActionPruning: {
      if (!risk) throw ConfigError("selection", "select_baseline", "action-pruning requires a risk source");
      std::vector<std::size_t> kept;
      for (std::size_t i = 0; i < n; ++i)
        if (risk->at(i) <= *cfg.pruning_threshold) kept.push_back(i);
      attach_risks(diag, *risk);
      if (kept.empty()) return result(conf, static_cast<std::size_t>(rng.uniform_index(n)), n, true, std::move(diag));
      return result(conf, uniform_pick(kept, rng), kept.size(), false, std::move(diag));
    }
    default:
      throw ConfigError("selection", "select_baseline", kind_name(cfg.kind) + " is not a baseline strategy");
  }
}

SelectionResult select_ogss_elimination(const ConfidenceMap& conf, RiskSource& risk, double delta) {
  require_nonempty(conf);
  const auto ranked = rank_by_confidence(conf);
  auto diag = base_diagnostics(conf);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (risk.at(ranked[i]) <= delta) {
      attach_risks(diag, risk);
      return result(conf, ranked[i], i + 1, false, std::move(diag));
    }
  }
  attach_risks(diag, risk);
  return result(conf, ranked.front(), ranked.size(), true, std::move(diag));
}

SelectionResult select_ogss_utility(const ConfidenceMap& conf, RiskSource& risk, double alpha) {
  require_nonempty(conf);
  auto diag = base_diagnostics(conf);
  std::size_t best = 0;
  double best_u = 0;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    const double u = alpha * conf.conf[i] + (1.0 - alpha) * (1.0 - risk.at(i));
    diag[i].utility = u;
    if (i == 0 || u > best_u || (u == best_u && conf.moves[i] < conf.moves[best])) {
      best = i;
      best_u = u;
    }
  }
  attach_risks(diag, risk);
  return result(conf, best, 1, false, std::move(diag));
}

SelectionResult select_ogss_topk_shield(const ConfidenceMap& conf, RiskSource& risk, int k) {
  require_nonempty(conf);
  if (k < 1) throw ConfigError("selection", "select_ogss_topk_shield", "K must be >= 1");
  const auto ranked = rank_by_confidence(conf);
  const std::size_t top = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  std::size_t best = ranked[0];
  for (std::size_t i = 1; i < top; ++i) {
    const std::size_t c = ranked[i];
    // ranked is already ordered by (higher conf, canonical), so only a
    // strictly lower risk displaces the incumbent.
    if (risk.at(c) < risk.at(best)) best = c;
  }
  if (top == 1) risk.at(best);
  auto diag = base_diagnostics(conf);
  attach_risks(diag, risk);
  return result(conf, best, top, false, std::move(diag));
}

SelectionResult select(const StrategyConfig& cfg, const ConfidenceMap& conf, RiskSource* risk, Rng& rng) {
  cfg.validate();
  if (cfg.needs_risk() && !risk)
    throw ConfigError("selection", "select", kind_name(cfg.kind) + " requires a blunder-risk source");
  switch (cfg.kind) {
    case StrategyKind::OgssElimination: return select_ogss_elimination(conf, *risk, *cfg.delta);
    case StrategyKind::OgssUtility: return select_ogss_utility(conf, *risk, *cfg.alpha);
    case StrategyKind::OgssTopKShield: return select_ogss_topk_shield(conf, *risk, *cfg.k);
    default: return select_baseline(cfg, conf, risk, rng);
  }
}

}  // namespace ogss::selection
