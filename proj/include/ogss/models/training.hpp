#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ogss/models/layers.hpp"
#include "ogss/util/error.hpp"

namespace ogss::models {

enum class OptimizerKind { SGD, SGDMomentum, Adam };
enum class PolicyLoss { CrossEntropy, SquaredError };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);  // "sgd" | "momentum" | "adam"

struct TrainingConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 1;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double momentum = 0.9;
  // Global L2 gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  PolicyLoss policy_loss = PolicyLoss::CrossEntropy;

  // lr >= 0 (0 freezes the weights), batch >= 1, epochs >= 0, clip >= 0.
  void validate() const;
};

class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(const std::string& operation, int epoch, std::size_t batch, double grad_norm);
  int epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }
  double grad_norm() const { return grad_norm_; }

 private:
  int epoch_;
  std::size_t batch_;
  double grad_norm_;
};

// Plain, momentum and Adam updates over a fixed parameter list.
class Optimizer {
 public:
  explicit Optimizer(const TrainingConfig& cfg) : cfg_(cfg) {}

  // Global gradient norm before clipping.
  static double grad_norm(const std::vector<Param<float>*>& params);

  // Clips, then applies one update. Returns the pre-clip gradient norm.
  double step(const std::vector<Param<float>*>& params);

 private:
  TrainingConfig cfg_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
  long step_ = 0;
};

// Mini-batch order for one epoch: a permutation of [0, n) derived from
// (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

}  // namespace ogss::models
