#pragma once

#include <optional>
#include <span>

#include "ogss/util/error.hpp"

namespace ogss::eval {

// mean ± t_{(1+level)/2, n-1} * s / sqrt(n).
struct Interval {
  double mean = 0;
  double half_width = 0;
  std::size_t n = 0;

  double lo() const { return mean - half_width; }
  double hi() const { return mean + half_width; }
};

// Throws Error when values.size() < 2.
Interval t_interval(std::span<const double> values, double level = 0.95);

// Two-sided paired t-test on a[i] - b[i]. All-zero differences give 1.0;
// constant nonzero differences give 0.0.
double paired_t_test(std::span<const double> a, std::span<const double> b);

// Spearman rank correlation with average ranks for ties; absent when
// n < 2 or either side is constant.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

// Median; mean of the two middle values for even sizes. Throws on empty.
double median(std::span<const double> values);

}  // namespace ogss::eval
