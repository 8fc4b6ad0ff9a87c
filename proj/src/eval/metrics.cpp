#include "ogss/eval/metrics.hpp"

#include <nlohmann/json.hpp>

#include "ogss/eval/stats.hpp"

namespace ogss::eval {

namespace {

struct Tally {
  std::size_t n = 0;
  std::size_t blunders = 0;
  std::size_t good = 0;
  double exploration = 0;
  std::vector<double> drops;

  void add(int drop, int considered, int legal, int threshold) {
    ++n;
    blunders += drop >= threshold;
    good += drop < kGoodMoveThreshold;
    exploration += static_cast<double>(considered) / static_cast<double>(legal);
    drops.push_back(static_cast<double>(drop));
  }

  GameMetrics finish(std::size_t index, std::uint64_t seed) const {
    const double dn = static_cast<double>(n);
    return {index,
            seed,
            n,
            static_cast<double>(blunders) / dn,
            static_cast<double>(good) / dn,
            median(drops),
            exploration / dn};
  }
};

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::BlunderRate: return "blunder_rate";
    case Metric::GoodMoveRate: return "good_move_rate";
    case Metric::MedianCpDrop: return "median_cp_drop";
    case Metric::ExplorationRatio: return "exploration_ratio";
  }
  return "?";
}

double GameMetrics::get(Metric m) const {
  switch (m) {
    case Metric::BlunderRate: return blunder_rate;
    case Metric::GoodMoveRate: return good_move_rate;
    case Metric::MedianCpDrop: return median_cp_drop;
    case Metric::ExplorationRatio: return exploration_ratio;
  }
  return 0;
}

std::vector<MoveAnnotation> annotate_game(const loop::GameRecord& record, int blunder_threshold) {
  std::vector<MoveAnnotation> out;
  for (std::size_t i = 0; i < record.plies.size(); ++i) {
    const auto& p = record.plies[i];
    if (!p.agent) continue;
    if (!p.label) throw Error("eval_harness", "annotate_game", "agent ply " + std::to_string(i) + " has no label");
    if (!p.selection)
      throw Error("eval_harness", "annotate_game", "agent ply " + std::to_string(i) + " has no selection result");
    MoveAnnotation a;
    a.ply = i;
    a.cp_drop = p.label->drop;
    a.is_blunder = a.cp_drop >= blunder_threshold;
    a.is_good = a.cp_drop < kGoodMoveThreshold;
    a.considered_count = p.selection->considered_count;
    a.legal_count = static_cast<int>(chess::legal_moves(p.before).size());
    if (a.considered_count < 1 || a.considered_count > a.legal_count)
      throw Error("eval_harness", "annotate_game", "agent ply " + std::to_string(i) + ": considered count out of range");
    out.push_back(a);
  }
  return out;
}

GameMetrics game_metrics(std::span<const MoveAnnotation> moves) {
  if (moves.empty()) throw Error("eval_harness", "game_metrics", "game has no agent moves");
  Tally t;
  for (const auto& m : moves) {
    ++t.n;
    t.blunders += m.is_blunder;
    t.good += m.is_good;
    t.exploration += static_cast<double>(m.considered_count) / static_cast<double>(m.legal_count);
    t.drops.push_back(static_cast<double>(m.cp_drop));
  }
  return t.finish(0, 0);
}

std::vector<GameMetrics> compute_metrics(std::span<const loop::GameRecord> records, int blunder_threshold) {
  std::vector<GameMetrics> out;
  for (const auto& r : records) {
    const auto ann = annotate_game(r, blunder_threshold);
    if (ann.empty()) continue;
    auto m = game_metrics(ann);
    m.game_index = r.index;
    m.seed = r.seed;
    out.push_back(m);
  }
  return out;
}

std::vector<GameMetrics> recompute_from_archive(std::istream& archive, int blunder_threshold) {
  std::vector<GameMetrics> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(archive, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Tally t;
      for (const auto& p : j.at("plies")) {
        if (!p.at("agent").get<bool>()) continue;
        if (!p.contains("label") || !p.contains("selection"))
          throw Error("eval_harness", "recompute_from_archive", "agent ply without label or selection");
        t.add(p["label"].at("drop").get<int>(), p["selection"].at("considered").get<int>(),
              p["selection"].at("legal").get<int>(), blunder_threshold);
      }
      if (t.n == 0) continue;
      out.push_back(t.finish(j.at("index").get<std::size_t>(), j.at("seed").get<std::uint64_t>()));
    } catch (const nlohmann::json::exception& e) {
      throw Error("eval_harness", "recompute_from_archive", "line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace ogss::eval
