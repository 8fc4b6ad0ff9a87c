#include "ogss/models/training.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace ogss::models {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::SGD: return "sgd";
    case OptimizerKind::SGDMomentum: return "momentum";
    case OptimizerKind::Adam: return "adam";
  }
  return "adam";
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "sgd") return OptimizerKind::SGD;
  if (text == "momentum") return OptimizerKind::SGDMomentum;
  if (text == "adam") return OptimizerKind::Adam;
  throw ConfigError("models", "training_config", "unknown optimizer '" + text + "' (sgd|momentum|adam)");
}

void TrainingConfig::validate() const {
  if (!std::isfinite(learning_rate) || learning_rate < 0)
    throw ConfigError("models", "training_config", "learning rate must be finite and >= 0");
  if (batch_size < 1) throw ConfigError("models", "training_config", "batch size must be >= 1");
  if (epochs < 0) throw ConfigError("models", "training_config", "epochs must be >= 0");
  if (!(clip_norm >= 0)) throw ConfigError("models", "training_config", "clip norm must be >= 0");
  if (!(momentum >= 0 && momentum < 1))
    throw ConfigError("models", "training_config", "momentum must be in [0, 1)");
}

NonFiniteLossError::NonFiniteLossError(const std::string& operation, int epoch, std::size_t batch,
                                       double grad_norm)
    : Error("models", operation,
            fmt::format("non-finite loss at epoch {} batch {} (gradient norm {})", epoch, batch, grad_norm)),
      epoch_(epoch),
      batch_(batch),
      grad_norm_(grad_norm) {}

double Optimizer::grad_norm(const std::vector<Param<float>*>& params) {
  double s = 0;
  for (const auto* p : params)
    for (float g : p->grad) s += static_cast<double>(g) * g;
  return std::sqrt(s);
}

double Optimizer::step(const std::vector<Param<float>*>& params) {
  const double norm = grad_norm(params);
  const float scale =
      cfg_.clip_norm > 0 && norm > cfg_.clip_norm ? static_cast<float>(cfg_.clip_norm / norm) : 1.0f;
  const float lr = static_cast<float>(cfg_.learning_rate);
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.emplace_back(p->size(), 0.0f);
      if (cfg_.optimizer == OptimizerKind::Adam) v_.emplace_back(p->size(), 0.0f);
    }
  }
  ++step_;
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr float kEps = 1e-8f;
  const float c1 = static_cast<float>(1.0 - std::pow(kBeta1, static_cast<double>(step_)));
  const float c2 = static_cast<float>(1.0 - std::pow(kBeta2, static_cast<double>(step_)));
  const float mu = static_cast<float>(cfg_.momentum);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& w = params[k]->value;
    const auto& grad = params[k]->grad;
    auto& m = m_[k];
    switch (cfg_.optimizer) {
      case OptimizerKind::SGD:
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * scale * grad[i];
        break;
      case OptimizerKind::SGDMomentum:
        for (std::size_t i = 0; i < w.size(); ++i) {
          m[i] = mu * m[i] + scale * grad[i];
          w[i] -= lr * m[i];
        }
        break;
      case OptimizerKind::Adam: {
        auto& v = v_[k];
        for (std::size_t i = 0; i < w.size(); ++i) {
          const float g = scale * grad[i];
          m[i] = static_cast<float>(kBeta1) * m[i] + static_cast<float>(1 - kBeta1) * g;
          v[i] = static_cast<float>(kBeta2) * v[i] + static_cast<float>(1 - kBeta2) * g * g;
          w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
        }
        break;
      }
    }
  }
  return norm;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(Rng::derive(seed, 1000 + static_cast<std::uint64_t>(epoch)));
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

}  // namespace ogss::models
