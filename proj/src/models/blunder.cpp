#include "ogss/models/blunder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ogss/data/dataset.hpp"
#include "ogss/models/metrics.hpp"

namespace ogss::models {

BlunderModel make_blunder_model(const BlunderArch& arch, std::uint64_t seed) {
  BlunderModel m(arch);
  m.init(seed);
  return m;
}

std::size_t BlunderDataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(examples.begin(), examples.end(), [](const BlunderExample& e) { return e.label == 1; }));
}

void write_blunder_dataset(std::ostream& out, const BlunderDataset& ds) {
  out << "ogss-blunder-dataset 1\n";
  for (const auto& e : ds.examples)
    out << chess::to_fen(e.state) << '\t' << e.move.uci() << '\t' << e.label << '\t' << e.provenance << '\n';
}

BlunderDataset read_blunder_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ogss-blunder-dataset 1")
    throw data::DatasetFormatError(1, "missing 'ogss-blunder-dataset 1' header");
  BlunderDataset ds;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::istringstream row(line);
    std::string col;
    while (std::getline(row, col, '\t')) cols.push_back(col);
    if (cols.size() == 3) cols.emplace_back();
    if (cols.size() != 4) throw data::DatasetFormatError(n, "expected 4 tab-separated columns");
    BlunderExample e;
    try {
      e.state = chess::parse_fen(cols[0]);
    } catch (const Error& err) {
      throw data::DatasetFormatError(n, err.what());
    }
    const auto mv = chess::MoveCode::parse_uci(cols[1]);
    const auto legal = chess::legal_moves(e.state);
    if (!mv || !std::binary_search(legal.begin(), legal.end(), *mv))
      throw data::DatasetFormatError(n, "illegal move '" + cols[1] + "'");
    e.move = *mv;
    if (cols[2] != "0" && cols[2] != "1") throw data::DatasetFormatError(n, "label must be 0 or 1");
    e.label = cols[2] == "1" ? 1 : 0;
    e.provenance = cols[3];
    ds.examples.push_back(std::move(e));
  }
  return ds;
}

void save_blunder_dataset(const std::filesystem::path& path, const BlunderDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("models", "save_blunder_dataset", "cannot open " + path.string());
  write_blunder_dataset(out, ds);
  if (!out) throw Error("models", "save_blunder_dataset", "write failed for " + path.string());
}

BlunderDataset load_blunder_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("models", "load_blunder_dataset", "cannot open " + path.string());
  return read_blunder_dataset(in);
}

namespace {

void append_extras(std::vector<float>& out, const chess::MetadataVector& meta, const chess::MoveVector& move) {
  out.insert(out.end(), meta.begin(), meta.end());
  out.insert(out.end(), move.begin(), move.end());
}

// Trunk input: piece planes, then (with move planes) from/to one-hot planes.
void append_input(std::vector<float>& out, const BlunderArch& arch, const chess::PieceTensor& board, int from, int to) {
  out.insert(out.end(), board.values.begin(), board.values.end());
  if (!arch.move_planes) return;
  const std::size_t base = out.size();
  out.resize(base + kMovePlanes * 64, 0.0f);
  out[base + static_cast<std::size_t>(from)] = 1.0f;
  out[base + 64 + static_cast<std::size_t>(to)] = 1.0f;
}

struct EncodedBlunderSet {
  std::vector<float> boards;
  std::vector<float> extras;
  std::vector<int> labels;
};

EncodedBlunderSet encode(const BlunderArch& arch, const BlunderDataset& ds, const std::vector<std::size_t>& subset) {
  EncodedBlunderSet e;
  e.boards.reserve(subset.size() * static_cast<std::size_t>(arch.input_channels()) * 64);
  for (std::size_t i : subset) {
    const auto& ex = ds.examples[i];
    append_input(e.boards, arch, chess::encode_board(ex.state), ex.move.from.index(), ex.move.to.index());
    append_extras(e.extras, chess::encode_metadata(ex.state), chess::encode_move(ex.move));
    e.labels.push_back(ex.label);
  }
  return e;
}

std::vector<double> predict(const BlunderModel& model, const EncodedBlunderSet& set) {
  constexpr std::size_t kChunk = 256;
  const std::size_t n = set.labels.size();
  const auto in = static_cast<std::size_t>(model.input_size());
  std::vector<double> out(n);
  BlunderWorkspace<float> ws;
  for (std::size_t lo = 0; lo < n; lo += kChunk) {
    const std::size_t b = std::min(kChunk, n - lo);
    ws.trunk.resize(1);
    ws.trunk[0].assign(set.boards.begin() + static_cast<std::ptrdiff_t>(lo * in),
                       set.boards.begin() + static_cast<std::ptrdiff_t>((lo + b) * in));
    std::vector<float> extras(set.extras.begin() + static_cast<std::ptrdiff_t>(lo * kExtraInputs),
                              set.extras.begin() + static_cast<std::ptrdiff_t>((lo + b) * kExtraInputs));
    model.forward(ws, extras, static_cast<int>(b));
    for (std::size_t i = 0; i < b; ++i) out[lo + i] = sigmoid(ws.head.back()[i]);
  }
  return out;
}

}  // namespace

double blunder_forward(const BlunderModel& model, const chess::PieceTensor& board,
                       const chess::MetadataVector& meta, const chess::MoveVector& move) {
  BlunderWorkspace<float> ws;
  ws.trunk.resize(1);
  append_input(ws.trunk[0], model.arch(), board, static_cast<int>(std::lround(move[0] * 63.0f)),
               static_cast<int>(std::lround(move[1] * 63.0f)));
  std::vector<float> extras;
  append_extras(extras, meta, move);
  model.forward(ws, extras, 1);
  return sigmoid(ws.head.back()[0]);
}

std::vector<double> blunder_risks(const BlunderModel& model, const chess::BoardState& state,
                                  std::span<const chess::MoveCode> moves) {
  if (moves.empty()) return {};
  const auto board = chess::encode_board(state);
  const auto meta = chess::encode_metadata(state);
  BlunderWorkspace<float> ws;
  ws.trunk.resize(1);
  std::vector<float> extras;
  for (const auto& m : moves) append_extras(extras, meta, chess::encode_move(m));
  if (model.arch().move_planes) {
    for (const auto& m : moves) append_input(ws.trunk[0], model.arch(), board, m.from.index(), m.to.index());
    model.forward(ws, extras, static_cast<int>(moves.size()));
  } else {
    append_input(ws.trunk[0], model.arch(), board, 0, 0);
    model.forward_shared(ws, extras, static_cast<int>(moves.size()));
  }
  std::vector<double> out(moves.size());
  for (std::size_t i = 0; i < moves.size(); ++i) out[i] = sigmoid(ws.head.back()[i]);
  return out;
}

BlunderTraining train_blunder(const BlunderModel& start, const BlunderDataset& ds, const TrainingConfig& cfg,
                              double holdout_fraction) {
  cfg.validate();
  if (!(holdout_fraction >= 0 && holdout_fraction < 1))
    throw ConfigError("models", "train_blunder", "holdout fraction must be in [0, 1)");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < ds.size(); ++i) (ds.examples[i].label == 1 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty())
    throw UndefinedMetricError("train_blunder", "dataset has a single class (" + std::to_string(pos.size()) +
                                                    " positives, " + std::to_string(neg.size()) +
                                                    " negatives); AUC is undefined");

  // Examples sharing a position (a blunder and its correction) stay on the
  // same side of the split.
  std::map<std::string, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto [it, fresh] = group_of.emplace(chess::to_fen(ds.examples[i].state), groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(Rng::derive(cfg.seed, 77));
  rng.shuffle(std::span<std::size_t>(order));
  const auto target = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(ds.size())));
  std::vector<std::size_t> train, holdout;
  for (std::size_t g : order) {
    auto& dst = holdout.size() < target && holdout.size() + groups[g].size() < ds.size() ? holdout : train;
    dst.insert(dst.end(), groups[g].begin(), groups[g].end());
  }
  std::sort(train.begin(), train.end());
  std::sort(holdout.begin(), holdout.end());

  const EncodedBlunderSet tr = encode(start.arch(), ds, train);
  const std::size_t n = train.size();
  BlunderTraining out{start, {}, 0, 0, n, holdout.size(), false};
  BlunderModel& model = out.model;
  const auto params = model.params();
  Optimizer opt(cfg);
  BlunderWorkspace<float> ws;
  std::vector<double> per_sample(n);
  const auto in = static_cast<std::size_t>(model.input_size());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, cfg.seed, epoch);
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const int b = static_cast<int>(std::min(n - lo, static_cast<std::size_t>(cfg.batch_size)));
      ws.trunk.resize(1);
      ws.trunk[0].resize(static_cast<std::size_t>(b) * in);
      std::vector<float> extras(static_cast<std::size_t>(b) * kExtraInputs);
      std::vector<int> y(b);
      for (int i = 0; i < b; ++i) {
        const std::size_t idx = order[lo + i];
        std::copy_n(tr.boards.begin() + static_cast<std::ptrdiff_t>(idx * in), in,
                    ws.trunk[0].begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(in)));
        std::copy_n(tr.extras.begin() + static_cast<std::ptrdiff_t>(idx * kExtraInputs), kExtraInputs,
                    extras.begin() + static_cast<std::ptrdiff_t>(i) * kExtraInputs);
        y[i] = tr.labels[idx];
      }
      model.forward(ws, extras, b);
      std::vector<double> losses(b, 0.0);
      std::vector<float> dz(b);
      sigmoid_binary_cross_entropy(ws.head.back().data(), b, y.data(), 1.0 / b, losses.data(), dz.data());
      model.backward(ws, std::move(dz), b);
      const bool finite = std::all_of(losses.begin(), losses.end(), [](double v) { return std::isfinite(v); });
      const double norm = Optimizer::grad_norm(params);
      if (!finite || !std::isfinite(norm)) throw NonFiniteLossError("train_blunder", epoch, batch_index, norm);
      opt.step(params);
      for (int i = 0; i < b; ++i) per_sample[order[lo + i]] = losses[i];
    }
    double total = 0;
    for (double v : per_sample) total += v;
    out.loss_curve.push_back(total / static_cast<double>(n));
  }

  const bool holdout_ok = std::any_of(holdout.begin(), holdout.end(), [&](std::size_t i) { return ds.examples[i].label == 1; }) &&
                          std::any_of(holdout.begin(), holdout.end(), [&](std::size_t i) { return ds.examples[i].label == 0; });
  if (!holdout_ok) {
    spdlog::warn("models.train_blunder: held-out split lacks a class; reporting metrics on the training split");
    out.metrics_on_train = true;
  }
  const EncodedBlunderSet ev = holdout_ok ? encode(model.arch(), ds, holdout) : tr;
  const auto scores = predict(model, ev);
  out.accuracy = accuracy(ev.labels, scores);
  out.auc = auc(ev.labels, scores);
  return out;
}

BlunderTraining train_blunder(const BlunderDataset& ds, const TrainingConfig& cfg, const BlunderArch& arch,
                              double holdout_fraction) {
  return train_blunder(make_blunder_model(arch, cfg.seed), ds, cfg, holdout_fraction);
}

}  // namespace ogss::models
