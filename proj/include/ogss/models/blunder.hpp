#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ogss/chess/encode.hpp"
#include "ogss/models/network.hpp"
#include "ogss/models/training.hpp"

namespace ogss::models {

using BlunderModel = BlunderNet<float>;

BlunderModel make_blunder_model(const BlunderArch& arch, std::uint64_t seed);

struct BlunderExample {
  chess::BoardState state;
  chess::MoveCode move;
  int label = 0;  // 1 = blunder
  std::string provenance;

  bool operator==(const BlunderExample&) const = default;
};

struct BlunderDataset {
  std::vector<BlunderExample> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  std::size_t positives() const;
};

// Text format: "ogss-blunder-dataset 1", then "<fen>\t<uci>\t<label>\t<provenance>".
void write_blunder_dataset(std::ostream& out, const BlunderDataset& ds);
BlunderDataset read_blunder_dataset(std::istream& in);
void save_blunder_dataset(const std::filesystem::path& path, const BlunderDataset& ds);
BlunderDataset load_blunder_dataset(const std::filesystem::path& path);

// Risk(m) = sigmoid(logit).
double blunder_forward(const BlunderModel& model, const chess::PieceTensor& board,
                       const chess::MetadataVector& meta, const chess::MoveVector& move);

// Risks of several moves in one position; the trunk runs once.
std::vector<double> blunder_risks(const BlunderModel& model, const chess::BoardState& state,
                                  std::span<const chess::MoveCode> moves);

struct BlunderTraining {
  BlunderModel model;
  std::vector<double> loss_curve;
  double accuracy = 0;  // threshold 0.5, on the held-out split
  double auc = 0;
  std::size_t n_train = 0;
  std::size_t n_holdout = 0;
  // True when the held-out split lacked a class and metrics fell back to
  // the training split.
  bool metrics_on_train = false;
};

// Seeded hold-out of about `holdout_fraction` of the examples, grouped by
// position so paired examples never straddle the split; BCE training on the
// rest. Throws UndefinedMetricError if the dataset has a single class.
BlunderTraining train_blunder(const BlunderModel& start, const BlunderDataset& ds, const TrainingConfig& cfg,
                              double holdout_fraction = 0.2);
BlunderTraining train_blunder(const BlunderDataset& ds, const TrainingConfig& cfg, const BlunderArch& arch,
                              double holdout_fraction = 0.2);

}  // namespace ogss::models
