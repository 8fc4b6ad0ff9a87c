#include "ogss/loop/archive.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "ogss/data/pgn.hpp"

namespace ogss::loop {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw Error("learning_loop", "read_archive", msg); }

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> opt_double(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

chess::MoveCode parse_move(const std::string& text) {
  auto m = chess::MoveCode::parse_uci(text);
  if (!m) fail("bad move '" + text + "'");
  return *m;
}

Json label_json(const oracle::BlunderLabel& l) {
  Json j;
  j["before"] = l.eval_before.value;
  j["before_mate"] = l.eval_before.is_mate_mapped;
  j["after"] = l.eval_after.value;
  j["after_mate"] = l.eval_after.is_mate_mapped;
  j["drop"] = l.drop;
  j["blunder"] = l.is_blunder;
  j["correction"] = l.correction ? Json(l.correction->uci()) : Json(nullptr);
  return j;
}

oracle::BlunderLabel parse_label(const Json& j) {
  oracle::BlunderLabel l;
  l.eval_before = {j.at("before").get<int>(), j.at("before_mate").get<bool>()};
  l.eval_after = {j.at("after").get<int>(), j.at("after_mate").get<bool>()};
  l.drop = j.at("drop").get<int>();
  l.is_blunder = j.at("blunder").get<bool>();
  if (!j.at("correction").is_null()) l.correction = parse_move(j.at("correction").get<std::string>());
  return l;
}

data::GameResult pgn_result(const GameRecord& r) {
  auto agent_wins = [&](bool yes) {
    const bool white = (r.agent_color == chess::Color::White) == yes;
    return white ? data::GameResult::WhiteWin : data::GameResult::BlackWin;
  };
  switch (r.outcome) {
    case Outcome::AgentWin:
      return agent_wins(true);
    case Outcome::AgentLoss:
      return agent_wins(false);
    case Outcome::Draw:
      return data::GameResult::Draw;
    case Outcome::Adjudicated:
      if (!r.final_eval) return data::GameResult::Unknown;
      if (*r.final_eval == 0) return data::GameResult::Draw;
      return agent_wins(*r.final_eval > 0);
  }
  return data::GameResult::Unknown;
}

}  // namespace

std::string archive_line(const GameRecord& r) {
  Json j;
  j["index"] = r.index;
  j["seed"] = r.seed;
  j["strategy"] = r.strategy;
  j["agent"] = r.agent_color == chess::Color::White ? "white" : "black";
  j["start"] = chess::to_fen(r.start);
  j["outcome"] = to_string(r.outcome);
  j["termination"] = to_string(r.termination);
  j["final_eval"] = r.final_eval ? Json(*r.final_eval) : Json(nullptr);
  j["error"] = r.error ? Json(*r.error) : Json(nullptr);
  Json plies = Json::array();
  for (const auto& p : r.plies) {
    Json jp;
    jp["uci"] = p.played.uci();
    jp["agent"] = p.agent;
    if (p.selection) {
      const auto& s = *p.selection;
      Json js;
      js["considered"] = s.considered_count;
      js["fallback"] = s.fallback_used;
      js["legal"] = s.diagnostics.size();
      const auto it = std::find_if(s.diagnostics.begin(), s.diagnostics.end(),
                                   [&](const auto& d) { return d.move == s.move; });
      if (it != s.diagnostics.end()) {
        js["conf"] = it->conf;
        js["risk"] = opt(it->risk);
        js["utility"] = opt(it->utility);
      }
      jp["selection"] = std::move(js);
    }
    if (p.label) jp["label"] = label_json(*p.label);
    plies.push_back(std::move(jp));
  }
  j["plies"] = std::move(plies);
  return j.dump();
}

GameRecord parse_archive_line(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    fail(std::string("not JSON: ") + e.what());
  }
  try {
    GameRecord r;
    r.index = j.at("index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.strategy = j.at("strategy").get<std::string>();
    const auto agent = j.at("agent").get<std::string>();
    if (agent != "white" && agent != "black") fail("bad agent colour '" + agent + "'");
    r.agent_color = agent == "white" ? chess::Color::White : chess::Color::Black;
    r.start = chess::parse_fen(j.at("start").get<std::string>());
    r.outcome = parse_outcome(j.at("outcome").get<std::string>());
    r.termination = parse_termination(j.at("termination").get<std::string>());
    if (!j.at("final_eval").is_null()) r.final_eval = j.at("final_eval").get<int>();
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    chess::BoardState state = r.start;
    for (const auto& jp : j.at("plies")) {
      Ply p;
      p.before = state;
      p.played = parse_move(jp.at("uci").get<std::string>());
      p.agent = jp.at("agent").get<bool>();
      if (jp.contains("selection")) {
        const auto& js = jp["selection"];
        selection::SelectionResult s;
        s.move = p.played;
        s.considered_count = js.at("considered").get<int>();
        s.fallback_used = js.at("fallback").get<bool>();
        const auto legal = chess::legal_moves(state);
        if (js.at("legal").get<std::size_t>() != legal.size()) fail("legal move count disagrees with replay");
        for (const auto& m : legal) s.diagnostics.push_back({m, 0.0, std::nullopt, std::nullopt});
        if (js.contains("conf")) {
          for (auto& d : s.diagnostics)
            if (d.move == p.played) {
              d.conf = js["conf"].get<double>();
              d.risk = opt_double(js["risk"]);
              d.utility = opt_double(js["utility"]);
            }
        }
        p.selection = std::move(s);
      }
      if (jp.contains("label")) p.label = parse_label(jp["label"]);
      state = chess::apply_move(state, p.played);
      r.plies.push_back(std::move(p));
    }
    return r;
  } catch (const Json::exception& e) {
    fail(std::string("malformed record: ") + e.what());
  }
}

void write_archive(std::ostream& out, std::span<const GameRecord> records) {
  for (const auto& r : records) out << archive_line(r) << '\n';
}

std::vector<GameRecord> read_archive(std::istream& in) {
  std::vector<GameRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(parse_archive_line(line));
    } catch (const Error& e) {
      fail("line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

void save_archive(const std::filesystem::path& path, std::span<const GameRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("learning_loop", "write_archive", "cannot open " + path.string());
  write_archive(out, records);
  if (!out) throw Error("learning_loop", "write_archive", "write failed for " + path.string());
}

std::vector<GameRecord> load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  return read_archive(in);
}

void write_pgn_export(std::ostream& out, std::span<const GameRecord> records) {
  for (const auto& r : records) {
    data::PgnGameOut g;
    const bool agent_white = r.agent_color == chess::Color::White;
    g.result = pgn_result(r);
    g.tags = {{"Event", "ogss games"},
              {"Round", std::to_string(r.index)},
              {"White", agent_white ? "agent " + r.strategy : "oracle"},
              {"Black", agent_white ? "oracle" : "agent " + r.strategy},
              {"Result", data::result_token(g.result)},
              {"Termination", to_string(r.termination)}};
    g.start = r.start;
    for (const auto& p : r.plies) g.moves.push_back(p.played);
    data::write_pgn(out, g);
  }
}

}  // namespace ogss::loop
