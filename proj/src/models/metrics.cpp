#include "ogss/models/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace ogss::models {

double auc(std::span<const int> labels, std::span<const double> scores) {
  if (labels.size() != scores.size())
    throw UndefinedMetricError("auc", "labels and scores differ in length");
  const std::size_t n = labels.size();
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("auc", "needs both classes");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of positive ranks with tied groups sharing their average rank;
  // ranks are doubled to stay integral.
  std::uint64_t rank_sum2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const std::uint64_t avg2 = (i + 1) + j;  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) rank_sum2 += avg2;
    i = j;
  }
  const double u = (static_cast<double>(rank_sum2) - static_cast<double>(pos) * (pos + 1)) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double accuracy(std::span<const int> labels, std::span<const double> scores, double threshold) {
  if (labels.empty() || labels.size() != scores.size())
    throw UndefinedMetricError("accuracy", "needs equally sized, non-empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if ((scores[i] >= threshold ? 1 : 0) == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace ogss::models
