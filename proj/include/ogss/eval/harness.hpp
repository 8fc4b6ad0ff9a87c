#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ogss/eval/metrics.hpp"
#include "ogss/eval/stats.hpp"
#include "ogss/loop/game.hpp"

namespace ogss::eval {

struct HarnessConfig {
  loop::GameOptions game;
  std::size_t n_games = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  oracle::OracleFactory opponent;
  oracle::OracleFactory labeler;

  void validate() const;
};

// Models available to the evaluated methods.
struct ModelSet {
  const models::PolicyModel* base = nullptr;
  const models::PolicyModel* safedagger = nullptr;  // retrained policy; falls back to base
  const models::BlunderModel* blunder = nullptr;
  loop::RiskMode risk_mode = loop::RiskMode::Model;
};

struct MethodSpec {
  std::string name;
  selection::StrategyConfig strategy;
  bool safedagger_policy = false;
};

// The sixteen compared methods, in table order.
std::vector<MethodSpec> table2_methods();

struct MethodRun {
  std::string method;
  std::vector<loop::GameRecord> games;
  std::vector<GameMetrics> metrics;
};

// Every method sees the same game seeds, so runs pair up by game index.
MethodRun run_method(const MethodSpec& spec, const ModelSet& models, const HarnessConfig& cfg);

struct MethodSummary {
  std::string method;
  std::array<Interval, 4> metrics;  // indexed like kMetrics
  std::vector<GameMetrics> games;

  const Interval& get(Metric m) const { return metrics[static_cast<std::size_t>(m)]; }
};

// Student-t intervals per metric; the drop metric aggregates per-game medians.
// Throws Error for fewer than 2 games.
MethodSummary aggregate(const std::string& method, std::vector<GameMetrics> per_game);

struct PairedComparison {
  std::string a;
  std::string b;
  Metric metric = Metric::BlunderRate;
  double mean_a = 0;
  double mean_b = 0;
  double p_value = 1;
};

PairedComparison compare(const MethodSummary& a, const MethodSummary& b, Metric metric);

struct SweepRow {
  double alpha = 0;
  Interval blunder_rate;
  Interval median_cp_drop;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::optional<double> spearman_blunder;  // vs alpha, over row means
  std::optional<double> spearman_median;
};

// OGSS-utility at each alpha over the same game seeds.
SweepTable alpha_sweep(const std::vector<double>& alphas, const ModelSet& models, const HarnessConfig& cfg);

struct MetricsReport {
  std::string fingerprint;
  std::vector<MethodSummary> methods;
  std::vector<PairedComparison> comparisons;
  std::optional<SweepTable> sweep;

  bool empty() const { return methods.empty() && !sweep; }
};

enum class ReportFormat { Csv, Json, PlotData };

// Files under `dir`:
//   csv:      report.csv (method,metric,mean,ci_lo,ci_hi,n), games.csv,
//             comparisons.csv, sweep.csv
//   json:     report.json
//   plotdata: fig2.dat (method blunder_rate exploration_ratio) and
//             fig3.dat (alpha blunder_pct median_cp_drop)
// Files for absent parts (no sweep, no comparisons) are not written.
// Output depends only on the report. Throws Error for an empty report.
std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& dir,
                                               const std::set<ReportFormat>& formats = {ReportFormat::Csv,
                                                                                        ReportFormat::Json,
                                                                                        ReportFormat::PlotData});

}  // namespace ogss::eval
