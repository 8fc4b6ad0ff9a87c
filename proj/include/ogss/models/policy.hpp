#pragma once

#include <array>
#include <span>
#include <vector>

#include "ogss/chess/encode.hpp"
#include "ogss/data/dataset.hpp"
#include "ogss/models/network.hpp"
#include "ogss/models/training.hpp"

namespace ogss::models {

using PolicyModel = PolicyNet<float>;

// Initialized model: He-uniform hidden layers, zero heads.
PolicyModel make_policy_model(const PolicyArch& arch, std::uint64_t seed);

struct PolicyHeads {
  std::array<double, 64> from{};
  std::array<double, 64> to{};
  std::array<double, kPromoClasses> promo{};
};

PolicyHeads policy_forward(const PolicyModel& model, const chess::PieceTensor& board);

// Per-move confidence over a legal set, in the order of `moves`.
struct ConfidenceMap {
  std::vector<chess::MoveCode> moves;
  std::vector<double> conf;

  std::size_t size() const { return moves.size(); }
  // Confidence of a move in the map; 0 if absent.
  double of(const chess::MoveCode& move) const;
};

// raw(m) = from[m.from] * to[m.to] * promo[m.promotion], renormalized over
// `legal`; uniform if the raw mass is below 1e-12.
ConfidenceMap move_confidences(const PolicyHeads& heads, std::span<const chess::MoveCode> legal);

// Confidences over legal_moves(state).
ConfidenceMap policy_confidences(const PolicyModel& model, const chess::BoardState& state);

struct PolicyTraining {
  PolicyModel model;
  std::vector<double> loss_curve;  // mean summed-head loss per epoch
};

// Mini-batch training from `start` (warm start). Per-epoch losses are the
// losses observed while the epoch's batches were processed.
PolicyTraining train_policy(const PolicyModel& start, const data::PolicyDataset& ds, const TrainingConfig& cfg);

// Fresh model initialized from cfg.seed.
PolicyTraining train_policy(const data::PolicyDataset& ds, const TrainingConfig& cfg, const PolicyArch& arch);

// Fraction of pairs whose most confident legal move is the labelled move.
double policy_accuracy(const PolicyModel& model, const data::PolicyDataset& ds);

}  // namespace ogss::models
