#include "ogss/eval/harness.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace ogss::eval {

namespace {

using selection::StrategyConfig;
using Json = nlohmann::ordered_json;

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) { return fmt::format("{:.6f}", v); }

Json interval_json(const Interval& iv) {
  return Json{{"mean", iv.mean}, {"ci_lo", iv.lo()}, {"ci_hi", iv.hi()}, {"half_width", iv.half_width}, {"n", iv.n}};
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

class Writer {
 public:
  Writer(const std::filesystem::path& dir, std::vector<std::filesystem::path>& written) : dir_(dir), written_(written) {}

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("eval_harness", "emit_report", "cannot write " + path.string());
    out << content;
    if (!out) throw Error("eval_harness", "emit_report", "write failed for " + path.string());
    written_.push_back(path);
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path>& written_;
};

}  // namespace

void HarnessConfig::validate() const {
  if (n_games < 2) throw ConfigError("eval_harness", "evaluate", "at least 2 games are needed for intervals");
  if (jobs < 1) throw ConfigError("eval_harness", "evaluate", "jobs must be >= 1");
  if (!opponent || !labeler) throw ConfigError("eval_harness", "evaluate", "opponent and labeler oracles required");
  game.validate();
}

std::vector<MethodSpec> table2_methods() {
  return {
      {"random", StrategyConfig::random(), false},
      {"greedy", StrategyConfig::greedy(), false},
      {"top-3", StrategyConfig::top_k(3), false},
      {"top-5", StrategyConfig::top_k(5), false},
      {"temperature-0.5", StrategyConfig::with_temperature(0.5), false},
      {"temperature-1.5", StrategyConfig::with_temperature(1.5), false},
      {"entropy-2.0", StrategyConfig::entropy_filter(2.0), false},
      {"entropy-4.0", StrategyConfig::entropy_filter(4.0), false},
      {"action-pruning", StrategyConfig::action_pruning(0.5), false},
      {"safedagger+greedy", StrategyConfig::greedy(), true},
      {"safedagger+top-3", StrategyConfig::top_k(3), true},
      {"safedagger+top-5", StrategyConfig::top_k(5), true},
      {"ogss-elimination", StrategyConfig::ogss_elimination(0.3), false},
      {"ogss-utility-0.6", StrategyConfig::ogss_utility(0.6), false},
      {"ogss-top-3-shield", StrategyConfig::ogss_topk_shield(3), false},
      {"ogss-top-5-shield", StrategyConfig::ogss_topk_shield(5), false},
  };
}

MethodRun run_method(const MethodSpec& spec, const ModelSet& models, const HarnessConfig& cfg) {
  cfg.validate();
  const models::PolicyModel* policy = spec.safedagger_policy && models.safedagger ? models.safedagger : models.base;
  if (!policy) throw ConfigError("eval_harness", "evaluate", "no policy model for " + spec.name);
  loop::Agent agent{policy, models.blunder, models.risk_mode, spec.strategy};
  MethodRun run{spec.name, loop::play_games(agent, cfg.opponent, cfg.labeler, cfg.game, cfg.n_games, cfg.seed, cfg.jobs),
                {}};
  for (const auto& g : run.games)
    if (g.error) spdlog::warn("eval_harness: {} game {} is partial: {}", spec.name, g.index, *g.error);
  run.metrics = compute_metrics(run.games);
  return run;
}

MethodSummary aggregate(const std::string& method, std::vector<GameMetrics> per_game) {
  if (per_game.size() < 2)
    throw Error("eval_harness", "aggregate",
                method + ": a confidence interval needs at least 2 games, got " + std::to_string(per_game.size()));
  MethodSummary s;
  s.method = method;
  for (std::size_t k = 0; k < kMetrics.size(); ++k) {
    std::vector<double> v;
    v.reserve(per_game.size());
    for (const auto& g : per_game) v.push_back(g.get(kMetrics[k]));
    s.metrics[k] = t_interval(v);
  }
  s.games = std::move(per_game);
  return s;
}

PairedComparison compare(const MethodSummary& a, const MethodSummary& b, Metric metric) {
  std::vector<double> va, vb;
  for (const auto& g : a.games) {
    const auto it = std::find_if(b.games.begin(), b.games.end(),
                                 [&](const GameMetrics& x) { return x.game_index == g.game_index; });
    if (it == b.games.end()) continue;
    if (it->seed != g.seed) throw Error("eval_harness", "paired_t_test", "game seeds differ between methods");
    va.push_back(g.get(metric));
    vb.push_back(it->get(metric));
  }
  return {a.method, b.method, metric, a.get(metric).mean, b.get(metric).mean, paired_t_test(va, vb)};
}

SweepTable alpha_sweep(const std::vector<double>& alphas, const ModelSet& models, const HarnessConfig& cfg) {
  if (alphas.empty()) throw ConfigError("eval_harness", "alpha_sweep", "no alpha values");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] >= 0 && alphas[i] <= 1)) throw ConfigError("eval_harness", "alpha_sweep", "alpha outside [0, 1]");
    if (i > 0 && !(alphas[i] > alphas[i - 1]))
      throw ConfigError("eval_harness", "alpha_sweep", "alphas must be strictly increasing");
  }
  SweepTable t;
  std::vector<double> blunder, drop;
  for (double a : alphas) {
    const MethodSpec spec{fmt::format("ogss-utility-{}", a), StrategyConfig::ogss_utility(a), false};
    const auto summary = aggregate(spec.name, run_method(spec, models, cfg).metrics);
    t.rows.push_back({a, summary.get(Metric::BlunderRate), summary.get(Metric::MedianCpDrop)});
    blunder.push_back(t.rows.back().blunder_rate.mean);
    drop.push_back(t.rows.back().median_cp_drop.mean);
  }
  t.spearman_blunder = spearman(alphas, blunder);
  t.spearman_median = spearman(alphas, drop);
  return t;
}

std::vector<std::filesystem::path> emit_report(const MetricsReport& report, const std::filesystem::path& dir,
                                               const std::set<ReportFormat>& formats) {
  if (report.empty()) throw Error("eval_harness", "emit_report", "report has no methods and no sweep");
  if (formats.empty()) throw ConfigError("eval_harness", "emit_report", "no output format selected");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("eval_harness", "emit_report", "cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  Writer w(dir, written);

  if (formats.count(ReportFormat::Csv)) {
    if (!report.methods.empty()) {
      std::string csv = "method,metric,mean,ci_lo,ci_hi,n\n";
      std::string games = "method,game,seed,n_agent_moves,blunder_rate,good_move_rate,median_cp_drop,exploration_ratio\n";
      for (const auto& m : report.methods) {
        for (Metric k : kMetrics) {
          const auto& iv = m.get(k);
          csv += fmt::format("{},{},{},{},{},{}\n", csv_field(m.method), metric_name(k), num(iv.mean), num(iv.lo()),
                             num(iv.hi()), iv.n);
        }
        for (const auto& g : m.games)
          games += fmt::format("{},{},{},{},{},{},{},{}\n", csv_field(m.method), g.game_index, g.seed,
                               g.n_agent_moves, num(g.blunder_rate), num(g.good_move_rate), num(g.median_cp_drop),
                               num(g.exploration_ratio));
      }
      w.write("report.csv", csv);
      w.write("games.csv", games);
    }
    if (!report.comparisons.empty()) {
      std::string csv = "a,b,metric,mean_a,mean_b,p_value\n";
      for (const auto& c : report.comparisons)
        csv += fmt::format("{},{},{},{},{},{:.6g}\n", csv_field(c.a), csv_field(c.b), metric_name(c.metric),
                           num(c.mean_a), num(c.mean_b), c.p_value);
      w.write("comparisons.csv", csv);
    }
    if (report.sweep) {
      std::string csv = "alpha,blunder_rate,blunder_ci_lo,blunder_ci_hi,median_cp_drop,drop_ci_lo,drop_ci_hi,n\n";
      for (const auto& r : report.sweep->rows)
        csv += fmt::format("{},{},{},{},{},{},{},{}\n", num(r.alpha), num(r.blunder_rate.mean), num(r.blunder_rate.lo()),
                           num(r.blunder_rate.hi()), num(r.median_cp_drop.mean), num(r.median_cp_drop.lo()),
                           num(r.median_cp_drop.hi()), r.blunder_rate.n);
      w.write("sweep.csv", csv);
    }
  }

  if (formats.count(ReportFormat::Json)) {
    Json j;
    j["format_version"] = 1;
    j["fingerprint"] = report.fingerprint;
    Json methods = Json::array();
    for (const auto& m : report.methods) {
      Json jm;
      jm["method"] = m.method;
      for (Metric k : kMetrics) jm[metric_name(k)] = interval_json(m.get(k));
      Json games = Json::array();
      for (const auto& g : m.games)
        games.push_back({{"game", g.game_index},
                         {"seed", g.seed},
                         {"n_agent_moves", g.n_agent_moves},
                         {"blunder_rate", g.blunder_rate},
                         {"good_move_rate", g.good_move_rate},
                         {"median_cp_drop", g.median_cp_drop},
                         {"exploration_ratio", g.exploration_ratio}});
      jm["games"] = std::move(games);
      methods.push_back(std::move(jm));
    }
    j["methods"] = std::move(methods);
    Json comps = Json::array();
    for (const auto& c : report.comparisons)
      comps.push_back({{"a", c.a},
                       {"b", c.b},
                       {"metric", metric_name(c.metric)},
                       {"mean_a", c.mean_a},
                       {"mean_b", c.mean_b},
                       {"p_value", c.p_value}});
    j["comparisons"] = std::move(comps);
    if (report.sweep) {
      Json rows = Json::array();
      for (const auto& r : report.sweep->rows)
        rows.push_back({{"alpha", r.alpha},
                        {"blunder_rate", interval_json(r.blunder_rate)},
                        {"median_cp_drop", interval_json(r.median_cp_drop)}});
      j["sweep"] = {{"rows", std::move(rows)},
                    {"spearman_blunder_rate", opt_json(report.sweep->spearman_blunder)},
                    {"spearman_median_cp_drop", opt_json(report.sweep->spearman_median)}};
    } else {
      j["sweep"] = nullptr;
    }
    w.write("report.json", j.dump(2) + "\n");
  }

  if (formats.count(ReportFormat::PlotData)) {
    if (!report.methods.empty()) {
      std::string dat = "# method blunder_rate exploration_ratio\n";
      for (const auto& m : report.methods)
        dat += fmt::format("{} {} {}\n", m.method, num(m.get(Metric::BlunderRate).mean),
                           num(m.get(Metric::ExplorationRatio).mean));
      w.write("fig2.dat", dat);
    }
    if (report.sweep) {
      std::string dat = "# alpha blunder_pct median_cp_drop\n";
      for (const auto& r : report.sweep->rows)
        dat += fmt::format("{} {} {}\n", num(r.alpha), num(100.0 * r.blunder_rate.mean), num(r.median_cp_drop.mean));
      w.write("fig3.dat", dat);
    }
  }
  return written;
}

}  // namespace ogss::eval
