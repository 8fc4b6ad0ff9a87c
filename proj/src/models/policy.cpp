#include "ogss/models/policy.hpp"

#include <algorithm>
#include <cmath>

namespace ogss::models {

PolicyModel make_policy_model(const PolicyArch& arch, std::uint64_t seed) {
  PolicyModel m(arch);
  m.init(seed);
  return m;
}

PolicyHeads policy_forward(const PolicyModel& model, const chess::PieceTensor& board) {
  PolicyWorkspace<float> ws;
  ws.trunk.resize(1);
  ws.trunk[0].assign(board.values.begin(), board.values.end());
  model.forward(ws, 1);
  PolicyHeads h;
  softmax_row(ws.from.data(), 64, h.from.data());
  softmax_row(ws.to.data(), 64, h.to.data());
  softmax_row(ws.promo.data(), kPromoClasses, h.promo.data());
  return h;
}

double ConfidenceMap::of(const chess::MoveCode& move) const {
  for (std::size_t i = 0; i < moves.size(); ++i)
    if (moves[i] == move) return conf[i];
  return 0.0;
}

ConfidenceMap move_confidences(const PolicyHeads& heads, std::span<const chess::MoveCode> legal) {
  ConfidenceMap map;
  map.moves.assign(legal.begin(), legal.end());
  map.conf.resize(legal.size());
  double total = 0;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    const auto& m = legal[i];
    map.conf[i] = heads.from[m.from.index()] * heads.to[m.to.index()] *
                  heads.promo[static_cast<int>(m.promotion)];
    total += map.conf[i];
  }
  if (total < 1e-12) {
    std::fill(map.conf.begin(), map.conf.end(), 1.0 / static_cast<double>(legal.size()));
  } else {
    for (auto& c : map.conf) c /= total;
  }
  return map;
}

ConfidenceMap policy_confidences(const PolicyModel& model, const chess::BoardState& state) {
  const auto legal = chess::legal_moves(state);
  return move_confidences(policy_forward(model, chess::encode_board(state)), legal);
}

namespace {

struct EncodedPolicySet {
  std::vector<float> boards;
  std::vector<int> from, to, promo;
};

EncodedPolicySet encode(const data::PolicyDataset& ds) {
  EncodedPolicySet e;
  e.boards.reserve(ds.size() * kBoardInputs);
  for (const auto& p : ds.pairs) {
    const auto t = chess::encode_board(p.state);
    e.boards.insert(e.boards.end(), t.values.begin(), t.values.end());
    e.from.push_back(p.move.from.index());
    e.to.push_back(p.move.to.index());
    e.promo.push_back(static_cast<int>(p.move.promotion));
  }
  return e;
}

}  // namespace

PolicyTraining train_policy(const PolicyModel& start, const data::PolicyDataset& ds, const TrainingConfig& cfg) {
  cfg.validate();
  if (ds.empty()) throw Error("models", "train_policy", "empty dataset");
  const EncodedPolicySet enc = encode(ds);
  const std::size_t n = ds.size();

  PolicyTraining out{start, {}};
  PolicyModel& model = out.model;
  const auto params = model.params();
  Optimizer opt(cfg);
  PolicyWorkspace<float> ws;
  std::vector<double> per_sample(n);
  const auto loss_fn = cfg.policy_loss == PolicyLoss::CrossEntropy ? softmax_cross_entropy<float>
                                                                   : softmax_squared_error<float>;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, cfg.seed, epoch);
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < n; lo += static_cast<std::size_t>(cfg.batch_size), ++batch_index) {
      const int b = static_cast<int>(std::min(n - lo, static_cast<std::size_t>(cfg.batch_size)));
      ws.trunk.resize(1);
      ws.trunk[0].resize(static_cast<std::size_t>(b) * kBoardInputs);
      std::vector<int> yf(b), yt(b), yp(b);
      for (int i = 0; i < b; ++i) {
        const std::size_t idx = order[lo + i];
        std::copy_n(enc.boards.begin() + static_cast<std::ptrdiff_t>(idx * kBoardInputs), kBoardInputs,
                    ws.trunk[0].begin() + static_cast<std::ptrdiff_t>(i) * kBoardInputs);
        yf[i] = enc.from[idx];
        yt[i] = enc.to[idx];
        yp[i] = enc.promo[idx];
      }
      model.forward(ws, b);
      std::vector<double> losses(b, 0.0);
      std::vector<float> df(ws.from.size()), dt(ws.to.size()), dp(ws.promo.size());
      const double scale = 1.0 / b;
      loss_fn(ws.from.data(), b, 64, yf.data(), scale, losses.data(), df.data());
      loss_fn(ws.to.data(), b, 64, yt.data(), scale, losses.data(), dt.data());
      loss_fn(ws.promo.data(), b, kPromoClasses, yp.data(), scale, losses.data(), dp.data());
      model.backward(ws, df, dt, dp, b);
      const bool finite = std::all_of(losses.begin(), losses.end(), [](double v) { return std::isfinite(v); });
      const double norm = Optimizer::grad_norm(params);
      if (!finite || !std::isfinite(norm)) throw NonFiniteLossError("train_policy", epoch, batch_index, norm);
      opt.step(params);
      for (int i = 0; i < b; ++i) per_sample[order[lo + i]] = losses[i];
    }
    double total = 0;
    for (double v : per_sample) total += v;
    out.loss_curve.push_back(total / static_cast<double>(n));
  }
  return out;
}

PolicyTraining train_policy(const data::PolicyDataset& ds, const TrainingConfig& cfg, const PolicyArch& arch) {
  return train_policy(make_policy_model(arch, cfg.seed), ds, cfg);
}

double policy_accuracy(const PolicyModel& model, const data::PolicyDataset& ds) {
  if (ds.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : ds.pairs) {
    const auto map = policy_confidences(model, p.state);
    const auto best = std::max_element(map.conf.begin(), map.conf.end()) - map.conf.begin();
    if (map.moves[static_cast<std::size_t>(best)] == p.move) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

}  // namespace ogss::models
