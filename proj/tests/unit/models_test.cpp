#include <gtest/gtest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "ogss/models/blunder.hpp"
#include "ogss/models/checkpoint.hpp"
#include "ogss/models/metrics.hpp"
#include "ogss/models/policy.hpp"
#include "positions.hpp"

namespace ogss::models {
namespace {

using chess::MoveCode;

MoveCode uci(std::string_view text) { return *MoveCode::parse_uci(text); }

const PolicyArch kSmallPolicy{4, 8, 16};
const BlunderArch kSmallBlunder{4, 8, {16, 8, 4}};

template <typename T>
std::vector<T> random_vector(std::size_t n, Rng& rng, double lo = -1, double hi = 1) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(lo + (hi - lo) * rng.uniform01());
  return v;
}

double rel_error(double a, double n) { return std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-8); }

// Indices to probe: all of them for small sizes, otherwise an even sample.
std::vector<std::size_t> probe(std::size_t n, std::size_t max_probes = 40) {
  std::vector<std::size_t> out;
  const std::size_t step = std::max<std::size_t>(1, n / max_probes);
  for (std::size_t i = 0; i < n; i += step) out.push_back(i);
  return out;
}

// loss = sum(out * r); compares backward() against central differences.
double max_layer_error(Layer<double>& layer, int batch, Rng& rng, bool avoid_kinks) {
  constexpr double h = 1e-4;
  auto in = random_vector<double>(static_cast<std::size_t>(batch) * layer.in_size(), rng);
  if (avoid_kinks)
    for (auto& x : in)
      if (std::abs(x) < 0.05) x += x < 0 ? -0.1 : 0.1;
  const auto r = random_vector<double>(static_cast<std::size_t>(batch) * layer.out_size(), rng);
  for (auto* p : layer.params()) p->value = random_vector<double>(p->size(), rng);

  std::vector<double> out(r.size());
  auto loss = [&] {
    layer.forward(in.data(), out.data(), batch);
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * r[i];
    return s;
  };
  loss();
  std::vector<double> din(in.size());
  layer.backward(in.data(), out.data(), r.data(), din.data(), batch);

  double worst = 0;
  for (std::size_t i : probe(in.size())) {
    const double x = in[i];
    in[i] = x + h;
    const double up = loss();
    in[i] = x - h;
    const double down = loss();
    in[i] = x;
    worst = std::max(worst, rel_error(din[i], (up - down) / (2 * h)));
  }
  for (auto* p : layer.params()) {
    const auto grad = p->grad;
    for (std::size_t i : probe(p->size())) {
      const double x = p->value[i];
      p->value[i] = x + h;
      const double up = loss();
      p->value[i] = x - h;
      const double down = loss();
      p->value[i] = x;
      worst = std::max(worst, rel_error(grad[i], (up - down) / (2 * h)));
    }
  }
  return worst;
}

TEST(GradientCheck, Conv3x3) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    Conv3x3<double> layer("c", 1 + t % 3, 1 + (t * 7) % 4);
    EXPECT_LT(max_layer_error(layer, 1 + t % 2, rng, false), 1e-3) << t;
  }
}

TEST(GradientCheck, ChannelAffine) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    ChannelAffine<double> layer("a", 1 + t % 4);
    EXPECT_LT(max_layer_error(layer, 1 + t % 3, rng, false), 1e-3) << t;
  }
}

TEST(GradientCheck, ReLU) {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    ReLU<double> layer(5 + t);
    EXPECT_LT(max_layer_error(layer, 1 + t % 3, rng, true), 1e-3) << t;
  }
}

TEST(GradientCheck, Dense) {
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    Dense<double> layer("d", 3 + t % 5, 2 + t % 4);
    EXPECT_LT(max_layer_error(layer, 1 + t % 4, rng, false), 1e-3) << t;
  }
}

using LossFn = std::function<void(const double*, int, const int*, double, double*, double*)>;

double max_loss_error(const LossFn& fn, int batch, int k, Rng& rng) {
  constexpr double h = 1e-4;
  auto logits = random_vector<double>(static_cast<std::size_t>(batch) * k, rng, -3, 3);
  std::vector<int> labels(batch);
  for (auto& y : labels) y = static_cast<int>(rng.uniform_index(k == 1 ? 2 : k));
  const double scale = 1.0 / batch;
  auto total = [&] {
    std::vector<double> per(batch, 0.0);
    std::vector<double> scratch(logits.size());
    fn(logits.data(), batch, labels.data(), scale, per.data(), scratch.data());
    double s = 0;
    for (double v : per) s += v;
    return s * scale;
  };
  std::vector<double> per(batch, 0.0);
  std::vector<double> grad(logits.size());
  fn(logits.data(), batch, labels.data(), scale, per.data(), grad.data());
  double worst = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    logits[i] = x + h;
    const double up = total();
    logits[i] = x - h;
    const double down = total();
    logits[i] = x;
    worst = std::max(worst, rel_error(grad[i], (up - down) / (2 * h)));
  }
  return worst;
}

TEST(GradientCheck, SoftmaxCrossEntropy) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + t % 6;
    LossFn fn = [k](const double* z, int b, const int* y, double s, double* per, double* d) {
      softmax_cross_entropy(z, b, k, y, s, per, d);
    };
    EXPECT_LT(max_loss_error(fn, 1 + t % 3, k, rng), 1e-3) << t;
  }
}

TEST(GradientCheck, SoftmaxSquaredError) {
  Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const int k = 2 + t % 6;
    LossFn fn = [k](const double* z, int b, const int* y, double s, double* per, double* d) {
      softmax_squared_error(z, b, k, y, s, per, d);
    };
    EXPECT_LT(max_loss_error(fn, 1 + t % 3, k, rng), 1e-3) << t;
  }
}

TEST(GradientCheck, SigmoidBinaryCrossEntropy) {
  Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    LossFn fn = [](const double* z, int b, const int* y, double s, double* per, double* d) {
      sigmoid_binary_cross_entropy(z, b, y, s, per, d);
    };
    EXPECT_LT(max_loss_error(fn, 1 + t % 5, 1, rng), 1e-3) << t;
  }
}

std::vector<double> random_boards(int batch, Rng& rng) {
  std::vector<double> v(static_cast<std::size_t>(batch) * kBoardInputs);
  for (auto& x : v) x = rng.uniform01() < 0.1 ? 1.0 : 0.0;
  return v;
}

TEST(GradientCheck, PolicyNetworkEndToEnd) {
  Rng rng(8);
  for (int t = 0; t < 3; ++t) {
    PolicyNet<double> net(PolicyArch{2, 3, 5});
    for (auto* p : net.params()) p->value = random_vector<double>(p->size(), rng, -0.5, 0.5);
    const int batch = 2;
    PolicyWorkspace<double> ws;
    const auto boards = random_boards(batch, rng);
    const std::vector<int> yf{3, 60}, yt{19, 2}, yp{0, 4};
    auto loss = [&](std::vector<double>* df, std::vector<double>* dt, std::vector<double>* dp) {
      ws.trunk.assign(1, boards);
      net.forward(ws, batch);
      std::vector<double> per(batch, 0.0);
      std::vector<double> a(ws.from.size()), b(ws.to.size()), c(ws.promo.size());
      softmax_cross_entropy(ws.from.data(), batch, 64, yf.data(), 0.5, per.data(), a.data());
      softmax_cross_entropy(ws.to.data(), batch, 64, yt.data(), 0.5, per.data(), b.data());
      softmax_cross_entropy(ws.promo.data(), batch, 5, yp.data(), 0.5, per.data(), c.data());
      if (df) {
        *df = a;
        *dt = b;
        *dp = c;
      }
      return (per[0] + per[1]) * 0.5;
    };
    std::vector<double> df, dt, dp;
    loss(&df, &dt, &dp);
    net.backward(ws, df, dt, dp, batch);
    for (auto* p : net.params()) {
      const auto grad = p->grad;
      for (std::size_t i : probe(p->size(), 8)) {
        const double x = p->value[i];
        p->value[i] = x + 1e-4;
        const double up = loss(nullptr, nullptr, nullptr);
        p->value[i] = x - 1e-4;
        const double down = loss(nullptr, nullptr, nullptr);
        p->value[i] = x;
        EXPECT_LT(rel_error(grad[i], (up - down) / 2e-4), 1e-3) << p->name << "[" << i << "]";
      }
    }
  }
}

TEST(GradientCheck, BlunderNetworkEndToEnd) {
  Rng rng(9);
  for (int t = 0; t < 3; ++t) {
    BlunderNet<double> net(BlunderArch{2, 3, {5, 4, 3}});
    for (auto* p : net.params()) p->value = random_vector<double>(p->size(), rng, -0.5, 0.5);
    const int batch = 3;
    BlunderWorkspace<double> ws;
    const auto boards = random_boards(batch, rng);
    const auto extras = random_vector<double>(batch * kExtraInputs, rng, 0, 1);
    const std::vector<int> y{1, 0, 1};
    auto loss = [&](std::vector<double>* dz) {
      ws.trunk.assign(1, boards);
      net.forward(ws, extras, batch);
      std::vector<double> per(batch, 0.0), d(batch);
      sigmoid_binary_cross_entropy(ws.head.back().data(), batch, y.data(), 1.0 / batch, per.data(), d.data());
      if (dz) *dz = d;
      return (per[0] + per[1] + per[2]) / batch;
    };
    std::vector<double> dz;
    loss(&dz);
    net.backward(ws, dz, batch);
    for (auto* p : net.params()) {
      const auto grad = p->grad;
      for (std::size_t i : probe(p->size(), 8)) {
        const double x = p->value[i];
        p->value[i] = x + 1e-4;
        const double up = loss(nullptr);
        p->value[i] = x - 1e-4;
        const double down = loss(nullptr);
        p->value[i] = x;
        EXPECT_LT(rel_error(grad[i], (up - down) / 2e-4), 1e-3) << p->name << "[" << i << "]";
      }
    }
  }
}

TEST(Kernels, SerialAndOpenMPAgree) {
  Rng rng(10);
  const int batch = 3, cin = 5, cout = 6, nin = 37, nout = 11;
  const auto in = random_vector<float>(batch * cin * 64, rng);
  const auto w = random_vector<float>(cout * cin * 9, rng);
  const auto b = random_vector<float>(cout, rng);
  const auto dout = random_vector<float>(batch * cout * 64, rng);
  std::vector<float> o1(batch * cout * 64), o2(o1.size());
  kernels::serial::conv3x3_forward(in.data(), batch, cin, w.data(), b.data(), cout, o1.data());
  kernels::omp::conv3x3_forward(in.data(), batch, cin, w.data(), b.data(), cout, o2.data());
  for (std::size_t i = 0; i < o1.size(); ++i) EXPECT_NEAR(o1[i], o2[i], 1e-4);
  std::vector<float> dw1(w.size()), dw2(w.size()), db1(cout), db2(cout), di1(in.size()), di2(in.size());
  kernels::serial::conv3x3_backward(in.data(), batch, cin, w.data(), cout, dout.data(), dw1.data(), db1.data(),
                                    di1.data());
  kernels::omp::conv3x3_backward(in.data(), batch, cin, w.data(), cout, dout.data(), dw2.data(), db2.data(),
                                 di2.data());
  for (std::size_t i = 0; i < dw1.size(); ++i) EXPECT_NEAR(dw1[i], dw2[i], 1e-3);
  for (std::size_t i = 0; i < db1.size(); ++i) EXPECT_NEAR(db1[i], db2[i], 1e-3);
  for (std::size_t i = 0; i < di1.size(); ++i) EXPECT_NEAR(di1[i], di2[i], 1e-4);

  const auto x = random_vector<float>(batch * nin, rng);
  const auto dw = random_vector<float>(nout * nin, rng);
  const auto dbias = random_vector<float>(nout, rng);
  const auto g = random_vector<float>(batch * nout, rng);
  std::vector<float> y1(batch * nout), y2(y1.size());
  kernels::serial::dense_forward(x.data(), batch, nin, dw.data(), dbias.data(), nout, y1.data());
  kernels::omp::dense_forward(x.data(), batch, nin, dw.data(), dbias.data(), nout, y2.data());
  for (std::size_t i = 0; i < y1.size(); ++i) EXPECT_NEAR(y1[i], y2[i], 1e-4);
  std::vector<float> gw1(dw.size()), gw2(dw.size()), gb1(nout), gb2(nout), gx1(x.size()), gx2(x.size());
  kernels::serial::dense_backward(x.data(), batch, nin, dw.data(), nout, g.data(), gw1.data(), gb1.data(), gx1.data());
  kernels::omp::dense_backward(x.data(), batch, nin, dw.data(), nout, g.data(), gw2.data(), gb2.data(), gx2.data());
  for (std::size_t i = 0; i < gw1.size(); ++i) EXPECT_NEAR(gw1[i], gw2[i], 1e-4);
  for (std::size_t i = 0; i < gb1.size(); ++i) EXPECT_NEAR(gb1[i], gb2[i], 1e-4);
  for (std::size_t i = 0; i < gx1.size(); ++i) EXPECT_NEAR(gx1[i], gx2[i], 1e-4);
}

TEST(Kernels, SerialBackendGivesSameModelOutputs) {
  const auto model = make_policy_model(kSmallPolicy, 3);
  const auto board = chess::encode_board(chess::BoardState::startpos());
  const auto a = policy_forward(model, board);
  set_backend(Backend::Serial);
  const auto b = policy_forward(model, board);
  set_backend(Backend::OpenMP);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(a.from[i], b.from[i], 1e-9);
}

TEST(Stability, ExtremeLogitsStayFinite) {
  const std::vector<double> z{1e4, -1e4, 0, 9999.5};
  std::vector<double> p(4);
  softmax_row(z.data(), 4, p.data());
  for (double v : p) EXPECT_TRUE(std::isfinite(v));
  std::vector<double> per(4, 0.0), d(4);
  const std::vector<int> y{0, 1, 1, 0};
  sigmoid_binary_cross_entropy(z.data(), 4, y.data(), 1.0, per.data(), d.data());
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_TRUE(std::isfinite(per[i]));
    EXPECT_TRUE(std::isfinite(d[i]));
  }
  std::vector<double> per2(1, 0.0), d2(4);
  const int label = 1;
  softmax_cross_entropy(z.data(), 1, 4, &label, 1.0, per2.data(), d2.data());
  EXPECT_NEAR(per2[0], 2e4 + std::log1p(std::exp(-0.5)), 1e-6);
  EXPECT_TRUE(std::isfinite(sigmoid(-1e4)));
}

chess::PieceTensor random_tensor(Rng& rng) {
  chess::PieceTensor t;
  for (auto& v : t.values) v = rng.uniform01() < 0.05 ? 1.0f : 0.0f;
  return t;
}

TEST(Policy, ZeroHeadsGiveUniformDistributions) {
  const auto model = make_policy_model(PolicyArch{}, 11);
  const auto h = policy_forward(model, chess::encode_board(chess::BoardState::startpos()));
  for (double p : h.from) EXPECT_DOUBLE_EQ(p, 1.0 / 64);
  for (double p : h.to) EXPECT_DOUBLE_EQ(p, 1.0 / 64);
  for (double p : h.promo) EXPECT_DOUBLE_EQ(p, 1.0 / 5);
}

TEST(Policy, ForwardIsPureAndNormalized) {
  auto model = make_policy_model(kSmallPolicy, 12);
  Rng rng(13);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.3, 0.3);
  for (int t = 0; t < 100; ++t) {
    const auto board = random_tensor(rng);
    const auto a = policy_forward(model, board);
    const auto b = policy_forward(model, board);
    EXPECT_EQ(a.from, b.from);
    EXPECT_EQ(a.to, b.to);
    EXPECT_EQ(a.promo, b.promo);
    double sf = 0, st = 0, sp = 0;
    for (double v : a.from) {
      sf += v;
      EXPECT_GT(v, 0);
    }
    for (double v : a.to) st += v;
    for (double v : a.promo) sp += v;
    EXPECT_NEAR(sf, 1, 1e-6);
    EXPECT_NEAR(st, 1, 1e-6);
    EXPECT_NEAR(sp, 1, 1e-6);
  }
}

TEST(Confidences, ConcentratedHeads) {
  PolicyHeads h;
  h.from[12] = 1;
  h.to[28] = 1;
  h.promo[0] = 1;
  const auto legal = chess::legal_moves(chess::BoardState::startpos());
  const auto map = move_confidences(h, legal);
  EXPECT_DOUBLE_EQ(map.of(uci("e2e4")), 1.0);
  EXPECT_DOUBLE_EQ(map.of(uci("d2d4")), 0.0);
}

TEST(Confidences, RenormalizesAndFallsBack) {
  PolicyHeads h;
  h.from[12] = 1;
  h.to[28] = 0.3;
  h.to[20] = 0.1;
  h.promo[0] = 1;
  const std::vector<MoveCode> two{uci("e2e3"), uci("e2e4")};
  const auto map = move_confidences(h, two);
  EXPECT_NEAR(map.of(uci("e2e4")), 0.75, 1e-12);
  EXPECT_NEAR(map.of(uci("e2e3")), 0.25, 1e-12);

  const auto zero = move_confidences(PolicyHeads{}, two);
  EXPECT_DOUBLE_EQ(zero.conf[0], 0.5);
  EXPECT_DOUBLE_EQ(zero.conf[1], 0.5);
}

TEST(Confidences, NormalizedOverRandomLegalSets) {
  auto model = make_policy_model(kSmallPolicy, 14);
  Rng rng(15);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.5, 0.5);
  for (const auto& s : testing::random_positions(80, 16)) {
    if (chess::legal_moves(s).empty()) continue;
    const auto map = policy_confidences(model, s);
    double total = 0;
    for (double c : map.conf) {
      EXPECT_GE(c, 0);
      EXPECT_LE(c, 1);
      total += c;
    }
    EXPECT_NEAR(total, 1, 1e-6);
  }
}

data::PolicyDataset single_pair() {
  data::PolicyDataset ds;
  ds.pairs.push_back({chess::BoardState::startpos(), uci("e2e4"), {"unit", 0}});
  return ds;
}

TEST(PolicyTraining, SinglePairConverges) {
  TrainingConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.batch_size = 1;
  cfg.epochs = 200;
  const auto result = train_policy(single_pair(), cfg, kSmallPolicy);
  ASSERT_EQ(result.loss_curve.size(), 200u);
  EXPECT_LT(result.loss_curve.back(), 0.1);
  const auto h = policy_forward(result.model, chess::encode_board(chess::BoardState::startpos()));
  EXPECT_EQ(std::max_element(h.from.begin(), h.from.end()) - h.from.begin(), 12);
  EXPECT_EQ(std::max_element(h.to.begin(), h.to.end()) - h.to.begin(), 28);
  EXPECT_EQ(std::max_element(h.promo.begin(), h.promo.end()) - h.promo.begin(), 0);
}

data::PolicyDataset small_dataset(std::size_t n) {
  data::PolicyDataset ds;
  Rng rng(17);
  for (const auto& s : testing::random_positions(n, 18)) {
    const auto legal = chess::legal_moves(s);
    if (legal.empty()) continue;
    ds.pairs.push_back({s, legal[rng.uniform_index(legal.size())], {"unit", 0}});
  }
  return ds;
}

TEST(PolicyTraining, SameSeedSameWeights) {
  TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  const auto ds = small_dataset(40);
  const auto a = train_policy(ds, cfg, kSmallPolicy);
  const auto b = train_policy(ds, cfg, kSmallPolicy);
  const auto pa = a.model.params();
  const auto pb = b.model.params();
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i]->value, pb[i]->value);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
}

TEST(PolicyTraining, ZeroLearningRateKeepsLossConstant) {
  TrainingConfig cfg;
  cfg.learning_rate = 0;
  cfg.epochs = 4;
  cfg.batch_size = 7;
  const auto r = train_policy(small_dataset(30), cfg, kSmallPolicy);
  for (double v : r.loss_curve) EXPECT_EQ(v, r.loss_curve.front());
}

TEST(PolicyTraining, SgdOnOneSampleIsMonotone) {
  TrainingConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.optimizer = OptimizerKind::SGD;
  cfg.batch_size = 1;
  cfg.epochs = 50;
  const auto r = train_policy(single_pair(), cfg, kSmallPolicy);
  for (std::size_t i = 1; i < r.loss_curve.size(); ++i) EXPECT_LE(r.loss_curve[i], r.loss_curve[i - 1]);
  EXPECT_LT(r.loss_curve.back(), r.loss_curve.front());
}

TEST(PolicyTraining, MomentumAndSquaredErrorOptionsTrain) {
  TrainingConfig cfg;
  cfg.optimizer = OptimizerKind::SGDMomentum;
  cfg.learning_rate = 0.05;
  cfg.policy_loss = PolicyLoss::SquaredError;
  cfg.epochs = 30;
  cfg.batch_size = 1;
  const auto r = train_policy(single_pair(), cfg, kSmallPolicy);
  EXPECT_LT(r.loss_curve.back(), r.loss_curve.front());
}

TEST(PolicyTraining, NonFiniteLossReportsBatch) {
  auto model = make_policy_model(kSmallPolicy, 1);
  model.params().front()->value[0] = std::numeric_limits<float>::quiet_NaN();
  TrainingConfig cfg;
  cfg.epochs = 1;
  try {
    train_policy(model, single_pair(), cfg);
    FAIL();
  } catch (const NonFiniteLossError& e) {
    EXPECT_EQ(e.batch(), 0u);
    EXPECT_EQ(e.epoch(), 0);
  }
}

TEST(PolicyTraining, ConfigValidation) {
  TrainingConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(train_policy(single_pair(), cfg, kSmallPolicy), ConfigError);
  cfg = {};
  cfg.learning_rate = -1;
  EXPECT_THROW(train_policy(single_pair(), cfg, kSmallPolicy), ConfigError);
  EXPECT_THROW(train_policy(data::PolicyDataset{}, TrainingConfig{}, kSmallPolicy), Error);
  EXPECT_THROW(parse_optimizer("rmsprop"), ConfigError);
  EXPECT_EQ(parse_optimizer("momentum"), OptimizerKind::SGDMomentum);
}

TEST(Blunder, ZeroFinalLayerGivesHalf) {
  const auto model = make_blunder_model(BlunderArch{}, 19);
  Rng rng(20);
  for (int t = 0; t < 5; ++t) {
    const auto board = random_tensor(rng);
    EXPECT_DOUBLE_EQ(blunder_forward(model, board, {1, 0, 1, 0, 1}, {0.2f, 0.5f, 0}), 0.5);
  }
}

TEST(Blunder, OutputsInOpenIntervalAndPure) {
  auto model = make_blunder_model(kSmallBlunder, 21);
  Rng rng(22);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.3, 0.3);
  for (int t = 0; t < 1000; ++t) {
    const auto board = random_tensor(rng);
    chess::MetadataVector meta;
    for (auto& v : meta) v = rng.uniform01() < 0.5 ? 1.0f : 0.0f;
    const chess::MoveVector mv{static_cast<float>(rng.uniform01()), static_cast<float>(rng.uniform01()), 0};
    const double r = blunder_forward(model, board, meta, mv);
    EXPECT_GT(r, 0);
    EXPECT_LT(r, 1);
    EXPECT_EQ(r, blunder_forward(model, board, meta, mv));
  }
}

TEST(Blunder, SharedTrunkMatchesSingleCalls) {
  auto model = make_blunder_model(kSmallBlunder, 23);
  Rng rng(24);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.3, 0.3);
  const auto s = chess::BoardState::startpos();
  const auto legal = chess::legal_moves(s);
  const auto risks = blunder_risks(model, s, legal);
  for (std::size_t i = 0; i < legal.size(); ++i)
    EXPECT_NEAR(risks[i],
                blunder_forward(model, chess::encode_board(s), chess::encode_metadata(s), chess::encode_move(legal[i])),
                1e-6);
}

TEST(Blunder, MovePlanesVariant) {
  BlunderArch arch = kSmallBlunder;
  arch.move_planes = true;
  EXPECT_EQ(arch.descriptor(), "blunder/v1 conv1=4 conv2=8 hidden=16,8,4 move=planes norm=affine");
  EXPECT_EQ(BlunderArch::parse(arch.descriptor()), arch);
  EXPECT_EQ(BlunderArch::parse(kSmallBlunder.descriptor()), kSmallBlunder);
  EXPECT_THROW(BlunderArch::parse("blunder/v1 conv1=4 conv2=8 hidden=16,8,4 move=lines norm=affine"), CheckpointError);
  auto model = make_blunder_model(arch, 31);
  EXPECT_EQ(model.input_size(), 14 * 64);
  Rng rng(32);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.3, 0.3);
  const auto s = chess::parse_fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3");
  const auto legal = chess::legal_moves(s);
  const auto risks = blunder_risks(model, s, legal);
  for (std::size_t i = 0; i < legal.size(); ++i)
    EXPECT_NEAR(risks[i],
                blunder_forward(model, chess::encode_board(s), chess::encode_metadata(s), chess::encode_move(legal[i])),
                1e-6);
}

// Positives carry a white knight, negatives a white bishop, at random squares.
BlunderDataset marker_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  BlunderDataset ds;
  while (ds.size() < n) {
    const int label = static_cast<int>(ds.size() % 2);
    std::string board(64, '.');
    board[rng.uniform_index(8)] = 'K';
    board[56 + rng.uniform_index(8)] = 'k';
    int marker;
    do marker = static_cast<int>(8 + rng.uniform_index(48));
    while (board[marker] != '.');
    board[marker] = label ? 'N' : 'B';
    std::string fen;
    for (int rank = 7; rank >= 0; --rank) {
      int empty = 0;
      for (int file = 0; file < 8; ++file) {
        const char c = board[rank * 8 + file];
        if (c == '.') {
          ++empty;
          continue;
        }
        if (empty) fen += std::to_string(empty);
        empty = 0;
        fen += c;
      }
      if (empty) fen += std::to_string(empty);
      if (rank) fen += '/';
    }
    fen += " w - - 0 1";
    chess::BoardState s;
    try {
      s = chess::parse_fen(fen);
    } catch (const Error&) {
      continue;
    }
    const auto legal = chess::legal_moves(s);
    if (legal.empty()) continue;
    ds.examples.push_back({s, legal[rng.uniform_index(legal.size())], label, "synthetic"});
  }
  return ds;
}

TEST(BlunderTraining, SeparableMarkerReachesHighAuc) {
  TrainingConfig cfg;
  cfg.epochs = 15;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  const auto r = train_blunder(marker_dataset(240, 25), cfg, kSmallBlunder);
  EXPECT_GT(r.auc, 0.95);
  EXPECT_FALSE(r.metrics_on_train);
  EXPECT_EQ(r.n_train + r.n_holdout, 240u);
  const auto again = train_blunder(marker_dataset(240, 25), cfg, kSmallBlunder);
  EXPECT_EQ(r.auc, again.auc);
  EXPECT_EQ(r.accuracy, again.accuracy);
}

TEST(BlunderTraining, SingleClassIsAnError) {
  auto ds = marker_dataset(20, 26);
  for (auto& e : ds.examples) e.label = 1;
  EXPECT_THROW(train_blunder(ds, TrainingConfig{}, kSmallBlunder), UndefinedMetricError);
}

TEST(BlunderDatasetIo, RoundTrip) {
  const auto ds = marker_dataset(10, 27);
  std::stringstream buf;
  write_blunder_dataset(buf, ds);
  const auto back = read_blunder_dataset(buf);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(chess::to_fen(back.examples[i].state), chess::to_fen(ds.examples[i].state));
    EXPECT_EQ(back.examples[i].move, ds.examples[i].move);
    EXPECT_EQ(back.examples[i].label, ds.examples[i].label);
  }
  EXPECT_EQ(ds.positives(), 5u);
}

TEST(Auc, Examples) {
  const std::vector<int> y1{1, 0};
  const std::vector<double> s1{0.9, 0.1};
  EXPECT_DOUBLE_EQ(auc(y1, s1), 1.0);
  const std::vector<int> y2{1, 1, 0, 0};
  const std::vector<double> s2{0.8, 0.4, 0.6, 0.2};
  EXPECT_DOUBLE_EQ(auc(y2, s2), 0.75);
  const std::vector<double> flat{0.3, 0.3, 0.3, 0.3};
  EXPECT_DOUBLE_EQ(auc(y2, flat), 0.5);
  const std::vector<int> one{1, 1};
  EXPECT_THROW(auc(one, s1), UndefinedMetricError);
}

TEST(Auc, MatchesPairCounting) {
  Rng rng(28);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.uniform_index(30);
    std::vector<int> y(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform01() < 0.5;
      s[i] = static_cast<double>(rng.uniform_index(6));  // plenty of ties
    }
    y[0] = 1;
    y[1] = 0;
    double good = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) {
          pairs += 1;
          good += s[i] > s[j] ? 1 : s[i] == s[j] ? 0.5 : 0;
        }
    EXPECT_DOUBLE_EQ(auc(y, s), good / pairs);
  }
}

TEST(Accuracy, Threshold) {
  const std::vector<int> y{1, 0, 1, 0};
  const std::vector<double> s{0.5, 0.49, 0.2, 0.9};
  EXPECT_DOUBLE_EQ(accuracy(y, s), 0.5);
}

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("ogss-ckpt-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CheckpointTest, PolicyRoundTripIsBitwise) {
  auto model = make_policy_model(kSmallPolicy, 29);
  Rng rng(30);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.5, 0.5);
  save_checkpoint(model, dir_ / "p.ckpt");
  const auto back = load_policy_checkpoint(dir_ / "p.ckpt");
  EXPECT_EQ(back.arch(), model.arch());
  for (int t = 0; t < 10; ++t) {
    const auto board = random_tensor(rng);
    const auto a = policy_forward(model, board);
    const auto b = policy_forward(back, board);
    EXPECT_EQ(a.from, b.from);
    EXPECT_EQ(a.to, b.to);
    EXPECT_EQ(a.promo, b.promo);
  }
}

TEST_F(CheckpointTest, BlunderRoundTripIsBitwise) {
  auto model = make_blunder_model(kSmallBlunder, 31);
  Rng rng(32);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.5, 0.5);
  save_checkpoint(model, dir_ / "b.ckpt");
  const auto back = load_blunder_checkpoint(dir_ / "b.ckpt");
  for (int t = 0; t < 10; ++t) {
    const auto board = random_tensor(rng);
    EXPECT_EQ(blunder_forward(model, board, {1, 1, 0, 0, 1}, {0.1f, 0.9f, 0.25f}),
              blunder_forward(back, board, {1, 1, 0, 0, 1}, {0.1f, 0.9f, 0.25f}));
  }
}

TEST_F(CheckpointTest, MovePlanesBlunderRoundTrip) {
  BlunderArch arch = kSmallBlunder;
  arch.move_planes = true;
  auto model = make_blunder_model(arch, 33);
  Rng rng(34);
  for (auto* p : model.params()) p->value = random_vector<float>(p->size(), rng, -0.5, 0.5);
  save_checkpoint(model, dir_ / "bp.ckpt");
  const auto back = load_blunder_checkpoint(dir_ / "bp.ckpt");
  EXPECT_EQ(back.arch(), arch);
  const auto s = chess::BoardState::startpos();
  const auto legal = chess::legal_moves(s);
  EXPECT_EQ(blunder_risks(model, s, legal), blunder_risks(back, s, legal));
}

CheckpointError::Kind load_error(const std::filesystem::path& path, bool policy) {
  try {
    if (policy) load_policy_checkpoint(path);
    else load_blunder_checkpoint(path);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return CheckpointError::Kind::Io;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary | std::ios::trunc) << s;
}

TEST_F(CheckpointTest, DistinctErrors) {
  const auto model = make_policy_model(kSmallPolicy, 33);
  const auto good = dir_ / "good.ckpt";
  save_checkpoint(model, good);
  const std::string bytes = slurp(good);

  spit(dir_ / "trunc.ckpt", bytes.substr(0, bytes.size() - 10));
  EXPECT_EQ(load_error(dir_ / "trunc.ckpt", true), CheckpointError::Kind::Truncated);

  std::string v2 = bytes;
  v2.replace(0, std::string("ogss-checkpoint 1").size(), "ogss-checkpoint 2");
  spit(dir_ / "v2.ckpt", v2);
  EXPECT_EQ(load_error(dir_ / "v2.ckpt", true), CheckpointError::Kind::Version);

  EXPECT_EQ(load_error(good, false), CheckpointError::Kind::Arch);

  std::string norm = bytes;
  norm.replace(norm.find("norm=affine"), 11, "norm=batchn");
  spit(dir_ / "norm.ckpt", norm);
  EXPECT_EQ(load_error(dir_ / "norm.ckpt", true), CheckpointError::Kind::Arch);

  std::string shape = bytes;
  shape.replace(shape.find("dense=16"), 8, "dense=17");
  spit(dir_ / "shape.ckpt", shape);
  EXPECT_EQ(load_error(dir_ / "shape.ckpt", true), CheckpointError::Kind::Shape);

  spit(dir_ / "junk.ckpt", "hello\n");
  EXPECT_EQ(load_error(dir_ / "junk.ckpt", true), CheckpointError::Kind::Format);
  EXPECT_EQ(load_error(dir_ / "missing.ckpt", true), CheckpointError::Kind::Io);
}

TEST_F(CheckpointTest, SaveIsByteStable) {
  const auto model = make_policy_model(kSmallPolicy, 34);
  save_checkpoint(model, dir_ / "a.ckpt");
  save_checkpoint(model, dir_ / "b.ckpt");
  EXPECT_EQ(slurp(dir_ / "a.ckpt"), slurp(dir_ / "b.ckpt"));
}

}  // namespace
}  // namespace ogss::models
