#include "ogss/cli/app.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "ogss/chess/board.hpp"
#include "ogss/cli/config.hpp"
#include "ogss/data/dataset.hpp"
#include "ogss/eval/harness.hpp"
#include "ogss/loop/archive.hpp"
#include "ogss/loop/reference.hpp"
#include "ogss/loop/safedagger.hpp"
#include "ogss/models/checkpoint.hpp"
#include "ogss/oracle/mock_oracle.hpp"
#include "ogss/oracle/uci_engine.hpp"
#include "ogss/util/rng.hpp"

namespace ogss::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Stream ids for Rng::derive, one per pipeline stage.
constexpr std::uint64_t kStreamReference = 101;
constexpr std::uint64_t kStreamSplit = 102;
constexpr std::uint64_t kStreamPolicy = 201;
constexpr std::uint64_t kStreamExplore = 300;
constexpr std::uint64_t kStreamBlunder = 401;
constexpr std::uint64_t kStreamEval = 501;
constexpr std::uint64_t kStreamSweep = 601;

struct Context {
  std::string command;
  RunConfig cfg;
  bool force = false;
  std::ostream* out = nullptr;

  fs::path run_dir() const { return cfg.get_path("run_dir"); }
  fs::path at(const fs::path& rel) const { return run_dir() / rel; }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(cfg.get_int("seed")); }
  std::uint64_t stream(std::uint64_t s) const { return Rng::derive(seed(), s); }
};

[[noreturn]] void fail(const Context& ctx, const std::string& message) { throw Error("app_cli", ctx.command, message); }
[[noreturn]] void config_fail(const Context& ctx, const std::string& message) {
  throw ConfigError("app_cli", ctx.command, message);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error("app_cli", "write", "cannot write " + path.string());
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("app_cli", "read", "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("app_cli", "read", path.string() + ": " + e.what());
  }
}

// ---- configuration to typed settings

oracle::OracleLimits oracle_limits(const RunConfig& cfg) {
  const long ms = cfg.get_int("oracle_movetime_ms");
  auto limits = ms > 0 ? oracle::OracleLimits::at_movetime(static_cast<int>(ms))
                       : oracle::OracleLimits::at_depth(static_cast<int>(cfg.get_int("oracle_depth")));
  limits.validate();
  return limits;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

void check_engine(const Context& ctx) {
  if (ctx.cfg.get_bool("mock_oracle")) return;
  const fs::path engine = ctx.cfg.get_path("engine");
  if (engine.empty()) config_fail(ctx, "no engine configured; set engine, OGSS_ENGINE or --mock-oracle");
  if (!fs::is_regular_file(engine)) config_fail(ctx, "engine not found: " + engine.string());
}

oracle::OracleFactory oracle_factory(const Context& ctx) {
  check_engine(ctx);
  const auto& cfg = ctx.cfg;
  if (cfg.get_bool("mock_oracle"))
    return oracle::mock_oracle_factory(cfg.get_bool("mock_positional"), cfg.get_bool("mock_quiescence"));
  oracle::EngineOptions opts;
  opts.path = cfg.get_string("engine");
  opts.args = split_words(cfg.get_string("engine_args"));
  return oracle::uci_engine_factory(opts);
}

std::string oracle_description(const RunConfig& cfg) {
  if (cfg.get_bool("mock_oracle"))
    return oracle::MockOracle(cfg.get_bool("mock_positional"), cfg.get_bool("mock_quiescence")).identity();
  return "uci " + cfg.get_string("engine") + " " + cfg.get_string("engine_args") + " " +
         oracle_limits(cfg).describe();
}

models::TrainingConfig training(const RunConfig& cfg, const std::string& prefix, std::uint64_t seed) {
  models::TrainingConfig t;
  t.learning_rate = cfg.get_double(prefix + "_lr");
  t.epochs = static_cast<int>(cfg.get_int(prefix + "_epochs"));
  t.batch_size = static_cast<int>(cfg.get_int("batch_size"));
  t.optimizer = models::parse_optimizer(cfg.get_string("optimizer"));
  t.momentum = cfg.get_double("momentum");
  t.clip_norm = cfg.get_double("clip_norm");
  t.seed = seed;
  t.validate();
  return t;
}

models::PolicyArch policy_arch(const RunConfig& cfg) {
  return {static_cast<int>(cfg.get_int("policy_conv1")), static_cast<int>(cfg.get_int("policy_conv2")),
          static_cast<int>(cfg.get_int("policy_dense"))};
}

models::BlunderArch blunder_arch(const Context& ctx) {
  const auto hidden = ctx.cfg.get_ints("blunder_hidden");
  if (hidden.size() != 3) config_fail(ctx, "blunder_hidden needs exactly three widths");
  models::BlunderArch a;
  a.conv1 = static_cast<int>(ctx.cfg.get_int("blunder_conv1"));
  a.conv2 = static_cast<int>(ctx.cfg.get_int("blunder_conv2"));
  for (int i = 0; i < 3; ++i) a.hidden[i] = static_cast<int>(hidden[i]);
  a.move_planes = ctx.cfg.get_bool("blunder_move_planes");
  return a;
}

loop::GameOptions game_options(const RunConfig& cfg) {
  loop::GameOptions o;
  o.max_plies = static_cast<int>(cfg.get_int("max_plies"));
  o.opening_plies = static_cast<int>(cfg.get_int("opening_plies"));
  o.opponent_limits = oracle_limits(cfg);
  o.label_limits = o.opponent_limits;
  o.blunder_threshold = static_cast<int>(cfg.get_int("blunder_threshold"));
  o.validate();
  return o;
}

loop::RiskMode risk_mode(const RunConfig& cfg) {
  return cfg.get_string("risk_mode") == "oracle-truth" ? loop::RiskMode::OracleTruth : loop::RiskMode::Model;
}

// Only the parameter the chosen kind uses is taken from the config.
selection::StrategyConfig strategy(const RunConfig& cfg, const std::string& kind_key) {
  using selection::StrategyKind;
  selection::StrategyConfig s;
  s.kind = selection::parse_kind(cfg.get_string(kind_key));
  switch (s.kind) {
    case StrategyKind::TopK:
    case StrategyKind::OgssTopKShield: s.k = static_cast<int>(cfg.get_int("k")); break;
    case StrategyKind::Temperature: s.temperature = cfg.get_double("temperature"); break;
    case StrategyKind::EntropyFilter: s.surprisal_bits = cfg.get_double("surprisal_bits"); break;
    case StrategyKind::ActionPruning: s.pruning_threshold = cfg.get_double("pruning_threshold"); break;
    case StrategyKind::OgssElimination: s.delta = cfg.get_double("delta"); break;
    case StrategyKind::OgssUtility: s.alpha = cfg.get_double("alpha"); break;
    default: break;
  }
  s.validate();
  return s;
}

std::set<eval::ReportFormat> report_formats(const Context& ctx) {
  std::set<eval::ReportFormat> out;
  std::stringstream ss(ctx.cfg.get_string("report_formats"));
  for (std::string f; std::getline(ss, f, ',');) {
    if (f == "csv") out.insert(eval::ReportFormat::Csv);
    else if (f == "json") out.insert(eval::ReportFormat::Json);
    else if (f == "plotdata") out.insert(eval::ReportFormat::PlotData);
    else config_fail(ctx, "unknown report format '" + f + "' (csv, json, plotdata)");
  }
  if (out.empty()) config_fail(ctx, "report_formats is empty");
  return out;
}

std::size_t count_of(const Context& ctx, const std::string& key, long min) {
  const long n = ctx.cfg.get_int(key);
  if (n < min) config_fail(ctx, fmt::format("{} must be >= {}", key, min));
  return static_cast<std::size_t>(n);
}

int jobs(const Context& ctx) { return static_cast<int>(count_of(ctx, "jobs", 1)); }

// ---- run-dir manifest

// manifest/<command>.json records the settings, inputs and outputs of a
// stage. It is written with status "started" before the work begins and
// rewritten as "complete" at the end. A complete manifest whose fingerprint
// and file digests still match lets the stage be skipped.
class Stage {
 public:
  explicit Stage(const Context& ctx) : ctx_(ctx) {
    fingerprint_ = ctx.cfg.fingerprint(ctx.command + "\n" + oracle_description(ctx.cfg));
  }

  const std::string& fingerprint() const { return fingerprint_; }

  void input(const fs::path& rel, bool required = true) {
    const fs::path p = ctx_.at(rel);
    if (!fs::exists(p)) {
      if (required) fail(ctx_, "missing " + p.string() + "; run the earlier stage first");
      return;
    }
    inputs_[rel.generic_string()] = sha256_file(p);
  }

  void external_input(const fs::path& path) {
    if (!fs::is_regular_file(path)) config_fail(ctx_, "input not found: " + path.string());
    inputs_[path.generic_string()] = sha256_file(path);
  }

  bool up_to_date() const {
    if (ctx_.force || !fs::exists(path())) return false;
    Json m;
    try {
      m = read_json(path());
    } catch (const Error&) {
      return false;
    }
    if (m.value("status", "") != "complete" || m.value("fingerprint", "") != fingerprint_) return false;
    if (m["inputs"] != inputs_json()) return false;
    for (const auto& [rel, digest] : m["outputs"].items()) {
      const fs::path p = ctx_.at(rel);
      if (!fs::exists(p) || sha256_file(p) != digest.get<std::string>()) return false;
    }
    return true;
  }

  void begin() {
    for (const char* d : {"data", "models"}) fs::create_directories(ctx_.at(d));
    write("started");
  }

  void output(const fs::path& rel) { outputs_.push_back(rel.generic_string()); }

  void complete(Json summary = Json::object()) {
    summary_ = std::move(summary);
    write("complete");
  }

 private:
  fs::path path() const { return ctx_.at(fs::path("manifest") / (ctx_.command + ".json")); }

  Json inputs_json() const {
    Json j = Json::object();
    for (const auto& [k, v] : inputs_) j[k] = v;
    return j;
  }

  void write(const std::string& status) const {
    Json m;
    m["format_version"] = kConfigFormatVersion;
    m["command"] = ctx_.command;
    m["status"] = status;
    m["fingerprint"] = fingerprint_;
    m["oracle"] = oracle_description(ctx_.cfg);
    Json settings = Json::object();
    for (const auto& k : config_schema())
      if (!k.runtime_only) settings[k.name] = ctx_.cfg.raw(k.name);
    m["config"] = settings;
    m["inputs"] = inputs_json();
    Json outs = Json::object();
    if (status == "complete") {
      std::vector<std::string> sorted = outputs_;
      std::sort(sorted.begin(), sorted.end());
      for (const auto& rel : sorted) outs[rel] = sha256_file(ctx_.at(rel));
    }
    m["outputs"] = outs;
    m["summary"] = summary_;
    write_text(path(), m.dump(2) + "\n");
  }

  const Context& ctx_;
  std::string fingerprint_;
  std::map<std::string, std::string> inputs_;
  std::vector<std::string> outputs_;
  Json summary_ = Json::object();
};

int skipped(const Context& ctx) {
  *ctx.out << ctx.command << ": up to date (manifest/" << ctx.command << ".json); use --force to rerun\n";
  return kExitOk;
}

// ---- subcommands

int cmd_ingest(const Context& ctx) {
  Stage stage(ctx);
  const fs::path pgn = ctx.cfg.get_path("pgn");
  const std::size_t synthetic = count_of(ctx, "synthetic_games", 0);
  if (pgn.empty() && synthetic == 0) config_fail(ctx, "set pgn or synthetic_games");
  if (!pgn.empty() && synthetic > 0) config_fail(ctx, "pgn and synthetic_games are mutually exclusive");
  if (!pgn.empty()) stage.external_input(pgn);
  else check_engine(ctx);
  const double fraction = ctx.cfg.get_double("train_fraction");
  if (!(fraction > 0 && fraction <= 1)) config_fail(ctx, "train_fraction must be in (0, 1]");
  const std::size_t limit = count_of(ctx, "max_games", 1);
  if (stage.up_to_date()) return skipped(ctx);
  stage.begin();

  data::PolicyDataset ds;
  std::size_t skipped_games = 0;
  std::size_t games_read = 0;
  if (!pgn.empty()) {
    std::ifstream in(pgn);
    data::PgnReader reader(in, pgn.filename().string());
    ds = data::build_policy_dataset(reader, limit, ctx.cfg.get_bool("winner_only"), &skipped_games);
  } else {
    loop::ReferenceOptions ro;
    ro.max_plies = static_cast<int>(count_of(ctx, "reference_max_plies", 1));
    ro.opening_plies = static_cast<int>(ctx.cfg.get_int("opening_plies"));
    ro.noise = ctx.cfg.get_double("reference_noise");
    ro.limits = oracle_limits(ctx.cfg);
    auto oracle = oracle_factory(ctx)();
    *ctx.out << fmt::format("ingest: generating {} reference games\n", synthetic);
    const auto games = loop::generate_reference_games(*oracle, synthetic, ctx.stream(kStreamReference), ro);
    games_read = games.size();
    std::ostringstream pgn_text;
    for (const auto& g : games) {
      data::PgnGameOut out;
      out.tags = {{"Event", "reference"}, {"Round", std::to_string(g.index + 1)},
                  {"White", oracle->identity()}, {"Black", oracle->identity()},
                  {"Result", data::result_token(g.result)}};
      out.start = g.start;
      out.moves = g.moves;
      out.result = g.result;
      data::write_pgn(pgn_text, out);
    }
    write_text(ctx.at("data/reference.pgn"), pgn_text.str());
    stage.output("data/reference.pgn");
    ds = data::build_policy_dataset(games, limit, ctx.cfg.get_bool("winner_only"));
  }
  const auto [train, validation] = data::split_dataset(ds, fraction, ctx.stream(kStreamSplit));
  fs::create_directories(ctx.at("data"));
  data::save_dataset(ctx.at("data/policy_train.tsv"), train);
  data::save_dataset(ctx.at("data/policy_val.tsv"), validation);
  stage.output("data/policy_train.tsv");
  stage.output("data/policy_val.tsv");

  std::set<std::pair<std::string, std::size_t>> kept;
  for (const auto& p : ds.pairs) kept.insert({p.provenance.source, p.provenance.game_index});
  Json summary;
  if (pgn.empty()) summary["generated_games"] = games_read;
  summary["games_kept"] = kept.size();
  summary["games_skipped"] = skipped_games;
  summary["pairs"] = ds.size();
  summary["train"] = train.size();
  summary["validation"] = validation.size();
  *ctx.out << fmt::format("ingest: {} games kept, {} pairs ({} train / {} validation)\n", kept.size(), ds.size(),
                          train.size(), validation.size());
  stage.complete(summary);
  return kExitOk;
}

int cmd_train_policy(const Context& ctx) {
  Stage stage(ctx);
  stage.input("data/policy_train.tsv");
  stage.input("data/policy_val.tsv");
  const auto cfg = training(ctx.cfg, "policy", ctx.stream(kStreamPolicy));
  const auto arch = policy_arch(ctx.cfg);
  if (stage.up_to_date()) return skipped(ctx);
  stage.begin();

  const auto train = data::load_dataset(ctx.at("data/policy_train.tsv"));
  const auto val = data::load_dataset(ctx.at("data/policy_val.tsv"));
  *ctx.out << fmt::format("train-policy: {} pairs, {} epochs\n", train.size(), cfg.epochs);
  const auto result = models::train_policy(train, cfg, arch);
  models::save_checkpoint(result.model, ctx.at("models/policy.ckpt"));
  stage.output("models/policy.ckpt");

  Json summary;
  summary["loss_curve"] = result.loss_curve;
  summary["train_accuracy"] = models::policy_accuracy(result.model, train);
  summary["validation_accuracy"] = val.empty() ? Json(nullptr) : Json(models::policy_accuracy(result.model, val));
  *ctx.out << fmt::format("train-policy: final loss {:.4f}\n",
                          result.loss_curve.empty() ? 0.0 : result.loss_curve.back());
  stage.complete(summary);
  return kExitOk;
}

int cmd_explore(const Context& ctx) {
  Stage stage(ctx);
  stage.input("models/policy.ckpt");
  stage.input("data/policy_train.tsv");
  const auto strat = strategy(ctx.cfg, "explore_strategy");
  const auto mode = risk_mode(ctx.cfg);
  const bool needs_blunder = strat.needs_risk() && mode == loop::RiskMode::Model;
  if (needs_blunder) {
    if (!fs::exists(ctx.at("models/blunder.ckpt")))
      config_fail(ctx, strat.label() + " needs models/blunder.ckpt; run train-blunder first");
    stage.input("models/blunder.ckpt");
  }
  const std::size_t rounds = count_of(ctx, "explore_rounds", 1);
  loop::RoundConfig base;
  base.n_games = count_of(ctx, "explore_games", 1);
  base.jobs = jobs(ctx);
  base.strategy = strat;
  base.risk_mode = mode;
  base.game = game_options(ctx.cfg);
  base.warm_start = ctx.cfg.get_bool("explore_warm_start");
  const auto factory = oracle_factory(ctx);
  if (stage.up_to_date()) return skipped(ctx);
  stage.begin();

  auto policy = models::load_policy_checkpoint(ctx.at("models/policy.ckpt"));
  std::optional<models::BlunderModel> blunder;
  if (needs_blunder) blunder = models::load_blunder_checkpoint(ctx.at("models/blunder.ckpt"));
  auto aggregate = data::load_dataset(ctx.at("data/policy_train.tsv"));
  models::BlunderDataset all;
  Json rounds_json = Json::array();
  for (std::size_t r = 1; r <= rounds; ++r) {
    auto rc = base;
    rc.round = static_cast<int>(r);
    rc.seed = ctx.stream(kStreamExplore + 2 * r);
    rc.training = training(ctx.cfg, "policy", ctx.stream(kStreamExplore + 2 * r + 1));
    *ctx.out << fmt::format("explore: round {} of {}, {} games\n", r, rounds, rc.n_games);
    auto result = loop::safedagger_round(policy, blunder ? &*blunder : nullptr, aggregate, rc, factory, factory);
    const fs::path dir = loop::save_round(ctx.at("explore"), result);
    for (const char* f : {"games.jsonl", "games.pgn", "blunders.tsv", "aggregate.tsv", "policy.ckpt"})
      stage.output(fs::relative(dir / f, ctx.run_dir()));

    std::size_t moves = 0;
    for (const auto& g : result.games) moves += g.agent_moves();
    Json rj;
    rj["round"] = r;
    rj["games"] = result.games.size();
    rj["agent_moves"] = moves;
    rj["flagged"] = result.stats.flagged;
    rj["contradictory"] = result.stats.contradictory;
    rj["duplicates"] = result.stats.duplicates;
    rj["positives"] = result.blunder_ds.positives();
    rj["negatives"] = result.blunder_ds.size() - result.blunder_ds.positives();
    rj["aggregate"] = result.aggregate.size();
    rounds_json.push_back(rj);
    *ctx.out << fmt::format("explore: {} agent moves, {} flagged, aggregate {}\n", moves, result.stats.flagged,
                            result.aggregate.size());

    for (auto& e : result.blunder_ds.examples) all.examples.push_back(std::move(e));
    policy = std::move(result.policy);
    aggregate = std::move(result.aggregate);
  }
  models::save_checkpoint(policy, ctx.at("models/policy_safedagger.ckpt"));
  models::save_blunder_dataset(ctx.at("data/blunders.tsv"), all);
  stage.output("models/policy_safedagger.ckpt");
  stage.output("data/blunders.tsv");
  Json summary;
  summary["rounds"] = rounds_json;
  summary["blunder_examples"] = all.size();
  stage.complete(summary);
  return kExitOk;
}

int cmd_train_blunder(const Context& ctx) {
  Stage stage(ctx);
  stage.input("data/blunders.tsv");
  const auto cfg = training(ctx.cfg, "blunder", ctx.stream(kStreamBlunder));
  const auto arch = blunder_arch(ctx);
  const double holdout = ctx.cfg.get_double("holdout_fraction");
  if (!(holdout >= 0 && holdout < 1)) config_fail(ctx, "holdout_fraction must be in [0, 1)");
  if (stage.up_to_date()) return skipped(ctx);
  stage.begin();

  const auto ds = models::load_blunder_dataset(ctx.at("data/blunders.tsv"));
  *ctx.out << fmt::format("train-blunder: {} examples ({} positive), {} epochs\n", ds.size(), ds.positives(),
                          cfg.epochs);
  const auto result = models::train_blunder(ds, cfg, arch, holdout);
  models::save_checkpoint(result.model, ctx.at("models/blunder.ckpt"));
  stage.output("models/blunder.ckpt");
  Json summary;
  summary["loss_curve"] = result.loss_curve;
  summary["accuracy"] = result.accuracy;
  summary["auc"] = result.auc;
  summary["n_train"] = result.n_train;
  summary["n_holdout"] = result.n_holdout;
  summary["metrics_on_train"] = result.metrics_on_train;
  *ctx.out << fmt::format("train-blunder: accuracy {:.4f}, AUC {:.4f}{}\n", result.accuracy, result.auc,
                          result.metrics_on_train ? " (training split)" : "");
  stage.complete(summary);
  return kExitOk;
}

struct LoadedModels {
  models::PolicyModel base;
  std::optional<models::PolicyModel> safedagger;
  std::optional<models::BlunderModel> blunder;

  eval::ModelSet set(loop::RiskMode mode) const {
    return {&base, safedagger ? &*safedagger : nullptr, blunder ? &*blunder : nullptr, mode};
  }
};

LoadedModels load_models(const Context& ctx, Stage& stage, bool want_safedagger, bool want_blunder) {
  stage.input("models/policy.ckpt");
  if (want_safedagger) stage.input("models/policy_safedagger.ckpt", false);
  if (want_blunder) {
    if (!fs::exists(ctx.at("models/blunder.ckpt")))
      config_fail(ctx, "risk_mode=model needs models/blunder.ckpt; run train-blunder first");
    stage.input("models/blunder.ckpt");
  }
  LoadedModels m{models::load_policy_checkpoint(ctx.at("models/policy.ckpt")), std::nullopt, std::nullopt};
  if (want_safedagger) {
    if (fs::exists(ctx.at("models/policy_safedagger.ckpt")))
      m.safedagger = models::load_policy_checkpoint(ctx.at("models/policy_safedagger.ckpt"));
    else
      spdlog::warn("app_cli.evaluate: no models/policy_safedagger.ckpt; SafeDAgger rows use the base policy");
  }
  if (want_blunder) m.blunder = models::load_blunder_checkpoint(ctx.at("models/blunder.ckpt"));
  return m;
}

eval::HarnessConfig harness(const Context& ctx, std::uint64_t stream) {
  eval::HarnessConfig h;
  h.game = game_options(ctx.cfg);
  h.n_games = count_of(ctx, "eval_games", 2);
  h.seed = ctx.stream(stream);
  h.jobs = jobs(ctx);
  h.opponent = oracle_factory(ctx);
  h.labeler = h.opponent;
  h.validate();
  return h;
}

std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_';
  return out;
}

void record_report(Stage& stage, const Context& ctx, const std::vector<fs::path>& files) {
  for (const auto& f : files) stage.output(fs::relative(f, ctx.run_dir()));
}

int cmd_evaluate(const Context& ctx) {
  Stage stage(ctx);
  const bool table2 = ctx.cfg.get_bool("table2");
  std::vector<eval::MethodSpec> methods;
  if (table2) {
    methods = eval::table2_methods();
  } else {
    const auto s = strategy(ctx.cfg, "strategy");
    methods.push_back({s.label(), s, false});
  }
  const auto mode = risk_mode(ctx.cfg);
  bool needs_blunder = false;
  for (const auto& m : methods) needs_blunder |= m.strategy.needs_risk() && mode == loop::RiskMode::Model;
  const auto formats = report_formats(ctx);
  const auto h = harness(ctx, kStreamEval);
  auto models = load_models(ctx, stage, table2, needs_blunder);
  if (stage.up_to_date()) return skipped(ctx);
  stage.begin();

  eval::MetricsReport report;
  report.fingerprint = stage.fingerprint();
  for (const auto& spec : methods) {
    *ctx.out << fmt::format("evaluate: {} ({} games)\n", spec.name, h.n_games);
    auto run = eval::run_method(spec, models.set(mode), h);
    const fs::path archive = fs::path("eval/games") / (file_safe(spec.name) + ".jsonl");
    fs::create_directories(ctx.at(archive).parent_path());
    loop::save_archive(ctx.at(archive), run.games);
    stage.output(archive);
    report.methods.push_back(eval::aggregate(spec.name, std::move(run.metrics)));
  }
  if (table2) {
    const std::pair<const char*, const char*> pairs[] = {{"ogss-top-3-shield", "top-3"},
                                                         {"ogss-top-5-shield", "top-5"},
                                                         {"ogss-elimination", "greedy"},
                                                         {"ogss-utility-0.6", "greedy"}};
    const auto find = [&](const std::string& n) -> const eval::MethodSummary& {
      for (const auto& m : report.methods)
        if (m.method == n) return m;
      fail(ctx, "method " + n + " missing from the report");
    };
    for (const auto& [a, b] : pairs) report.comparisons.push_back(eval::compare(find(a), find(b), eval::Metric::BlunderRate));
  }
  record_report(stage, ctx, eval::emit_report(report, ctx.at("eval"), formats));

  Json summary = Json::object();
  for (const auto& m : report.methods) {
    summary[m.method] = {{"blunder_rate", m.get(eval::Metric::BlunderRate).mean},
                         {"exploration_ratio", m.get(eval::Metric::ExplorationRatio).mean}};
    *ctx.out << fmt::format("  {:<28} blunder {:.4f} ± {:.4f}  exploration {:.4f}\n", m.method,
                            m.get(eval::Metric::BlunderRate).mean, m.get(eval::Metric::BlunderRate).half_width,
                            m.get(eval::Metric::ExplorationRatio).mean);
  }
  stage.complete(summary);
  return kExitOk;
}

int cmd_sweep(const Context& ctx) {
  Stage stage(ctx);
  const auto alphas = ctx.cfg.get_doubles("sweep_alphas");
  const auto mode = risk_mode(ctx.cfg);
  const auto formats = report_formats(ctx);
  const auto h = harness(ctx, kStreamSweep);
  auto models = load_models(ctx, stage, false, mode == loop::RiskMode::Model);
  if (stage.up_to_date()) return skipped(ctx);
  stage.begin();

  eval::MetricsReport report;
  report.fingerprint = stage.fingerprint();
  *ctx.out << fmt::format("sweep-alpha: {} alphas x {} games\n", alphas.size(), h.n_games);
  report.sweep = eval::alpha_sweep(alphas, models.set(mode), h);
  record_report(stage, ctx, eval::emit_report(report, ctx.at("sweep"), formats));
  Json summary;
  summary["spearman_blunder"] = report.sweep->spearman_blunder ? Json(*report.sweep->spearman_blunder) : Json(nullptr);
  summary["spearman_median"] = report.sweep->spearman_median ? Json(*report.sweep->spearman_median) : Json(nullptr);
  for (const auto& row : report.sweep->rows)
    *ctx.out << fmt::format("  alpha {:<5} blunder {:.4f}  median drop {:.2f}\n", row.alpha, row.blunder_rate.mean,
                            row.median_cp_drop.mean);
  stage.complete(summary);
  return kExitOk;
}

int cmd_perft(const Context& ctx, const std::string& fen, int depth) {
  if (depth < 0) config_fail(ctx, "depth must be >= 0");
  const auto state = chess::parse_fen(fen);
  *ctx.out << chess::perft(state, depth) << "\n";
  return kExitOk;
}

std::string describe(const oracle::CentipawnScore& s) {
  return s.is_mate_mapped ? fmt::format("{} (mate)", s.value) : fmt::format("{} cp", s.value);
}

int cmd_engine_check(const Context& ctx) {
  check_engine(ctx);
  const auto limits = oracle_limits(ctx.cfg);
  std::unique_ptr<oracle::Oracle> oracle;
  oracle::UciEngine* engine = nullptr;
  if (ctx.cfg.get_bool("mock_oracle")) {
    oracle = oracle_factory(ctx)();
  } else {
    oracle::EngineOptions opts;
    opts.path = ctx.cfg.get_string("engine");
    opts.args = split_words(ctx.cfg.get_string("engine_args"));
    auto e = std::make_unique<oracle::UciEngine>(opts);
    engine = e.get();
    oracle = std::move(e);
  }
  auto& out = *ctx.out;
  out << "engine: " << oracle->identity() << "\n";
  if (engine) out << "ping: " << (engine->ping() ? "ok" : "no answer") << "\n";
  const auto start = chess::BoardState::startpos();
  const auto result = oracle->search(start, limits);
  out << "startpos: " << describe(result.score) << ", best " << (result.best_move ? result.best_move->uci() : "(none)") << "\n";
  const auto e2e4 = *chess::MoveCode::parse_uci("e2e4");
  const auto label = oracle::label_move(*oracle, start, e2e4, limits);
  out << fmt::format("label e2e4: before {}, after {}, drop {}, blunder {}\n", describe(label.eval_before),
                     describe(label.eval_after), label.drop, label.is_blunder ? "yes" : "no");
  if (engine) out << "restarts: " << engine->restarts() << "\n";
  return kExitOk;
}

std::string dashed(std::string s) {
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

void configure_logging(const RunConfig& cfg) {
  static const bool once = [] {
    spdlog::set_default_logger(spdlog::stderr_logger_mt("ogss"));
    spdlog::set_pattern("[%l] %v");
    return true;
  }();
  (void)once;
  spdlog::set_level(spdlog::level::from_str(cfg.get_string("log_level")));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oracle-guided soft shielding for chess policies", "ogss"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> sets;
  bool force = false;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--set", sets, "override one setting, key=value")->take_all();
  app.add_flag("--force", force, "rerun stages whose manifest says they are up to date");

  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_opts;
  auto* settings = "Settings (mirror the config keys)";
  for (const auto& k : config_schema()) {
    auto& slot = flag_values[k.name];
    const std::string name = "--" + dashed(k.name);
    CLI::Option* o = k.kind == ValueKind::Bool ? app.add_flag(name + "{true}", slot, k.help)
                                               : app.add_option(name, slot, k.help);
    flag_opts[k.name] = o->group(settings);
  }

  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {
      {"ingest", "build the policy dataset from PGN or generated reference games"},
      {"train-policy", "train the imitation policy"},
      {"explore", "play exploration games with oracle labels and aggregate corrections"},
      {"train-blunder", "train the blunder model on oracle-flagged moves"},
      {"evaluate", "play paired evaluation games and write the report"},
      {"sweep-alpha", "evaluate ogss-utility over a range of alpha"},
      {"perft", "count legal move paths from a position"},
      {"engine-check", "probe the configured UCI engine"},
  };
  std::map<std::string, CLI::App*> sub;
  for (const auto& s : subs) sub[s.name] = app.add_subcommand(s.name, s.help);

  std::optional<long> games;
  for (const char* n : {"explore", "evaluate", "sweep-alpha"})
    sub[n]->add_option("--games", games, "games per round or method");
  std::string fen = "startpos";
  int depth = 0;
  sub["perft"]->add_option("--fen", fen, "FEN or 'startpos'");
  sub["perft"]->add_option("--depth", depth, "depth in plies")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "app_cli.parse: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  Context ctx;
  ctx.command = app.get_subcommands().front()->get_name();
  ctx.force = force;
  ctx.out = &out;
  try {
    if (!config_path.empty()) ctx.cfg.load_file(config_path);
    if (const char* env = std::getenv("OGSS_ENGINE"); env && *env) ctx.cfg.set("engine", env);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("app_cli", "config", "--set expects key=value, got '" + s + "'");
      ctx.cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, opt] : flag_opts)
      if (opt->count() > 0) ctx.cfg.set(key, flag_values[key]);
    if (games) ctx.cfg.set(ctx.command == "explore" ? "explore_games" : "eval_games", std::to_string(*games));
    configure_logging(ctx.cfg);

    if (ctx.command == "ingest") return cmd_ingest(ctx);
    if (ctx.command == "train-policy") return cmd_train_policy(ctx);
    if (ctx.command == "explore") return cmd_explore(ctx);
    if (ctx.command == "train-blunder") return cmd_train_blunder(ctx);
    if (ctx.command == "evaluate") return cmd_evaluate(ctx);
    if (ctx.command == "sweep-alpha") return cmd_sweep(ctx);
    if (ctx.command == "perft") return cmd_perft(ctx, fen, depth);
    return cmd_engine_check(ctx);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: app_cli." << ctx.command << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace ogss::cli
