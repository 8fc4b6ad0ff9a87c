#pragma once

#include <span>

#include "ogss/util/error.hpp"

namespace ogss::models {

class UndefinedMetricError : public Error {
 public:
  UndefinedMetricError(const std::string& operation, const std::string& message)
      : Error("models", operation, message) {}
};

// Mann-Whitney AUC: fraction of (positive, negative) pairs ordered correctly,
// ties counting one half. Throws UndefinedMetricError without both classes.
double auc(std::span<const int> labels, std::span<const double> scores);

// Fraction of samples with (score >= threshold) == label.
double accuracy(std::span<const int> labels, std::span<const double> scores, double threshold = 0.5);

}  // namespace ogss::models
