#include "ogss/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ogss/util/rng.hpp"

namespace ogss::data {

namespace {

void append_game(PolicyDataset& ds, const GameRecordRaw& g, bool winner_only) {
  const chess::Color winner =
      g.result == GameResult::WhiteWin ? chess::Color::White : chess::Color::Black;
  chess::BoardState pos = g.start;
  for (const auto& m : g.moves) {
    if (!winner_only || pos.side_to_move() == winner)
      ds.pairs.push_back({pos, m, {g.source, g.index}});
    pos = chess::apply_move(pos, m);
  }
}

}  // namespace

PolicyDataset build_policy_dataset(std::span<const GameRecordRaw> games, std::size_t limit,
                                   bool winner_only) {
  if (limit == 0) throw ConfigError("data_ingest", "build_policy_dataset", "limit must be > 0");
  PolicyDataset ds;
  std::size_t kept = 0;
  for (const auto& g : games) {
    if (kept >= limit) break;
    if (!g.ends_in_checkmate) continue;
    append_game(ds, g, winner_only);
    ++kept;
  }
  if (kept == 0) throw EmptyDatasetError("no game ending in checkmate among the input");
  return ds;
}

PolicyDataset build_policy_dataset(PgnReader& reader, std::size_t limit, bool winner_only,
                                   std::size_t* skipped) {
  if (limit == 0) throw ConfigError("data_ingest", "build_policy_dataset", "limit must be > 0");
  PolicyDataset ds;
  std::size_t kept = 0;
  std::size_t errors = 0;
  while (kept < limit) {
    auto entry = reader.next();
    if (!entry) break;
    if (entry->error) {
      ++errors;
      spdlog::warn("data_ingest: game {} skipped at ply {} ('{}'): {}", entry->error->index,
                   entry->error->ply, entry->error->token, entry->error->message);
      continue;
    }
    if (!entry->game->ends_in_checkmate) continue;
    append_game(ds, *entry->game, winner_only);
    ++kept;
  }
  if (skipped) *skipped = errors;
  if (kept == 0) throw EmptyDatasetError("no game ending in checkmate among the input");
  return ds;
}

std::pair<PolicyDataset, PolicyDataset> split_dataset(const PolicyDataset& ds, double fraction,
                                                      std::uint64_t seed) {
  if (ds.empty()) throw EmptyDatasetError("cannot split an empty dataset");
  if (!(fraction > 0.0 && fraction < 1.0))
    throw ConfigError("data_ingest", "split_dataset", "fraction must lie in (0, 1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.size())));
  std::pair<PolicyDataset, PolicyDataset> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_train ? out.first : out.second).pairs.push_back(ds.pairs[order[i]]);
  if (out.first.empty() || out.second.empty())
    spdlog::warn("data_ingest: split of {} pairs at fraction {} leaves train={} validation={}",
                 ds.size(), fraction, out.first.size(), out.second.size());
  return out;
}

void write_dataset(std::ostream& out, const PolicyDataset& ds) {
  out << kPolicyDatasetHeader << '\n';
  for (const auto& p : ds.pairs)
    out << chess::to_fen(p.state) << '\t' << p.move.uci() << '\t' << p.provenance.source << '\t'
        << p.provenance.game_index << '\n';
}

PolicyDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kPolicyDatasetHeader)
    throw DatasetFormatError(1, "missing or unsupported header");
  PolicyDataset ds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, '\t');) cols.push_back(col);
    if (cols.size() != 4) throw DatasetFormatError(lineno, "expected 4 tab-separated columns");
    PolicyExample ex;
    try {
      ex.state = chess::parse_fen(cols[0]);
    } catch (const chess::FenError& e) {
      throw DatasetFormatError(lineno, e.what());
    }
    auto move = chess::MoveCode::parse_uci(cols[1]);
    if (!move) throw DatasetFormatError(lineno, "bad move '" + cols[1] + "'");
    const auto legal = chess::legal_moves(ex.state);
    if (!std::binary_search(legal.begin(), legal.end(), *move))
      throw DatasetFormatError(lineno, "move " + cols[1] + " is illegal in its position");
    ex.move = *move;
    ex.provenance.source = cols[2];
    ex.provenance.game_index = std::stoull(cols[3]);
    ds.pairs.push_back(std::move(ex));
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const PolicyDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("data_ingest", "save_dataset", "cannot write " + path.string());
  write_dataset(out, ds);
}

PolicyDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("data_ingest", "load_dataset", "cannot read " + path.string());
  return read_dataset(in);
}

}  // namespace ogss::data
