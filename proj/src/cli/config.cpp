#include "ogss/cli/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace ogss::cli {
namespace {

[[noreturn]] void bad(const std::string& message) { throw ConfigError("app_cli", "config", message); }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::optional<long> parse_long(const std::string& s) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

KeySpec key(std::string name, ValueKind kind, std::string def, std::string help) {
  return {std::move(name), kind, std::move(def), std::move(help), {}, false};
}

KeySpec choice(std::string name, std::string def, std::vector<std::string> choices, std::string help) {
  return {std::move(name), ValueKind::Choice, std::move(def), std::move(help), std::move(choices), false};
}

KeySpec runtime(KeySpec k) {
  k.runtime_only = true;
  return k;
}

std::vector<KeySpec> build_schema() {
  using K = ValueKind;
  const std::vector<std::string> strategies{"random",          "greedy",          "top-k",
                                            "temperature",     "entropy-filter",  "action-pruning",
                                            "ogss-elimination", "ogss-utility",   "ogss-topk-shield"};
  return {
      key("format_version", K::Int, "1", "config schema version"),
      runtime(key("run_dir", K::Path, "run", "directory for every artifact")),
      key("seed", K::Int, "1", "root seed for all randomness"),
      runtime(key("jobs", K::Int, "1", "concurrent games")),
      runtime(choice("log_level", "info", {"debug", "info", "warn", "error"}, "log verbosity")),
      // oracle
      key("engine", K::Path, "", "UCI engine executable (env OGSS_ENGINE overrides)"),
      key("engine_args", K::String, "", "space-separated engine arguments"),
      key("mock_oracle", K::Bool, "false", "use the built-in material evaluator instead of an engine"),
      key("mock_positional", K::Bool, "false", "mock oracle adds piece-square terms"),
      key("mock_quiescence", K::Bool, "true", "mock oracle resolves captures before scoring"),
      key("oracle_depth", K::Int, "8", "search depth per oracle query"),
      key("oracle_movetime_ms", K::Int, "0", "search time per query; 0 uses oracle_depth"),
      // ingest
      key("pgn", K::Path, "", "PGN game collection for ingest"),
      key("synthetic_games", K::Int, "0", "oracle-vs-oracle reference games generated when no PGN is given"),
      key("reference_noise", K::Double, "0.15", "random-move chance in reference games"),
      key("reference_max_plies", K::Int, "300", "ply cap for reference games"),
      key("max_games", K::Int, "10000", "checkmate games kept by ingest"),
      key("winner_only", K::Bool, "true", "keep only the winner's moves"),
      key("train_fraction", K::Double, "0.9", "policy train/validation split"),
      // training
      key("policy_conv1", K::Int, "32", "policy trunk width, first conv"),
      key("policy_conv2", K::Int, "64", "policy trunk width, second conv"),
      key("policy_dense", K::Int, "256", "policy dense layer width"),
      key("policy_epochs", K::Int, "10", "policy epochs (also each exploration round)"),
      key("policy_lr", K::Double, "0.001", "policy learning rate"),
      key("blunder_conv1", K::Int, "32", "blunder trunk width, first conv"),
      key("blunder_conv2", K::Int, "64", "blunder trunk width, second conv"),
      key("blunder_hidden", K::IntList, "128,64,32", "blunder head widths (three)"),
      key("blunder_move_planes", K::Bool, "true", "feed the proposed move to the blunder trunk"),
      key("blunder_epochs", K::Int, "10", "blunder model epochs"),
      key("blunder_lr", K::Double, "0.001", "blunder model learning rate"),
      key("holdout_fraction", K::Double, "0.2", "blunder hold-out share"),
      choice("optimizer", "adam", {"sgd", "momentum", "adam"}, "optimizer"),
      key("momentum", K::Double, "0.9", "momentum coefficient"),
      key("batch_size", K::Int, "32", "mini-batch size"),
      key("clip_norm", K::Double, "5", "gradient norm clip; 0 disables"),
      // games
      key("max_plies", K::Int, "200", "plies per game before adjudication"),
      key("opening_plies", K::Int, "4", "random plies before recording"),
      key("blunder_threshold", K::Int, "100", "centipawn drop that counts as a blunder"),
      choice("risk_mode", "model", {"model", "oracle-truth"}, "risk source for shielded strategies"),
      // exploration
      key("explore_games", K::Int, "200", "games per exploration round"),
      key("explore_rounds", K::Int, "1", "exploration rounds"),
      choice("explore_strategy", "top-k", strategies, "strategy during exploration"),
      key("explore_warm_start", K::Bool, "true", "retrain from the incoming weights"),
      // strategy parameters
      choice("strategy", "ogss-utility", strategies, "strategy for evaluate"),
      key("k", K::Int, "5", "K for top-k and ogss-topk-shield"),
      key("temperature", K::Double, "1", "softmax temperature"),
      key("surprisal_bits", K::Double, "2", "entropy filter threshold"),
      key("pruning_threshold", K::Double, "0.5", "action pruning threshold"),
      key("delta", K::Double, "0.3", "ogss-elimination risk threshold"),
      key("alpha", K::Double, "0.6", "ogss-utility weight"),
      // evaluation
      key("eval_games", K::Int, "50", "paired games per method"),
      key("table2", K::Bool, "false", "evaluate every compared method instead of one strategy"),
      key("sweep_alphas", K::DoubleList, "0,0.25,0.5,0.75,1", "alpha values for sweep-alpha"),
      key("report_formats", K::String, "csv,json,plotdata", "report outputs"),
  };
}

}  // namespace

const std::vector<KeySpec>& config_schema() {
  static const std::vector<KeySpec> schema = build_schema();
  return schema;
}

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : config_schema())
    if (k.name == name) return &k;
  return nullptr;
}

std::string canonical_value(const KeySpec& spec, const std::string& text) {
  const std::string v = trim(text);
  const auto fail = [&](const std::string& what) -> std::string {
    bad(spec.name + ": expected " + what + ", got '" + v + "'");
  };
  switch (spec.kind) {
    case ValueKind::Bool:
      if (v == "true" || v == "1" || v == "yes" || v == "on") return "true";
      if (v == "false" || v == "0" || v == "no" || v == "off") return "false";
      return fail("a boolean");
    case ValueKind::Int:
      if (auto n = parse_long(v)) return std::to_string(*n);
      return fail("an integer");
    case ValueKind::Double:
      if (auto d = parse_double(v)) return fmt_double(*d);
      return fail("a number");
    case ValueKind::DoubleList:
    case ValueKind::IntList: {
      std::string out;
      for (const auto& item : split_list(v)) {
        std::string c;
        if (spec.kind == ValueKind::IntList) {
          auto n = parse_long(item);
          if (!n) return fail("a comma-separated list of integers");
          c = std::to_string(*n);
        } else {
          auto d = parse_double(item);
          if (!d) return fail("a comma-separated list of numbers");
          c = fmt_double(*d);
        }
        out += (out.empty() ? "" : ",") + c;
      }
      return out;
    }
    case ValueKind::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : "|") + c;
        return fail("one of " + all);
      }
      return v;
    case ValueKind::String:
    case ValueKind::Path:
      return v;
  }
  return v;
}

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) values_[k.name] = k.default_value;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) bad("unknown key '" + key + "'");
  values_[key] = canonical_value(*spec, value);
  if (key == "format_version" && values_[key] != std::to_string(kConfigFormatVersion))
    bad("format_version " + values_[key] + " is not supported (expected " + std::to_string(kConfigFormatVersion) + ")");
}

void RunConfig::load_text(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool versioned = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) bad(fmt::format("{}:{}: expected 'key = value'", source, lineno));
    const std::string k = trim(t.substr(0, eq));
    try {
      set(k, t.substr(eq + 1));
    } catch (const ConfigError& e) {
      bad(fmt::format("{}:{}: {}", source, lineno, e.what()));
    }
    versioned |= k == "format_version";
  }
  if (!versioned) bad(source + ": missing format_version");
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str(), path.string());
}

const std::string& RunConfig::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) bad("unknown key '" + key + "'");
  return it->second;
}

bool RunConfig::get_bool(const std::string& key) const { return raw(key) == "true"; }
long RunConfig::get_int(const std::string& key) const { return *parse_long(raw(key)); }
double RunConfig::get_double(const std::string& key) const { return *parse_double(raw(key)); }

std::vector<double> RunConfig::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : split_list(raw(key))) out.push_back(*parse_double(s));
  return out;
}

std::vector<long> RunConfig::get_ints(const std::string& key) const {
  std::vector<long> out;
  for (const auto& s : split_list(raw(key))) out.push_back(*parse_long(s));
  return out;
}

std::string RunConfig::dump() const {
  std::string out;
  for (const auto& k : config_schema()) out += k.name + " = " + raw(k.name) + "\n";
  return out;
}

std::string RunConfig::fingerprint(const std::string& extra) const {
  std::string text;
  for (const auto& k : config_schema())
    if (!k.runtime_only) text += k.name + "=" + raw(k.name) + "\n";
  return sha256_hex(text + extra).substr(0, 16);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("app_cli", "sha256", "digest failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("app_cli", "sha256", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace ogss::cli
