#include "ogss/eval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace ogss::eval {

namespace {

double mean_of(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v, double mean) {
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

Interval t_interval(std::span<const double> values, double level) {
  if (values.size() < 2)
    throw Error("eval_harness", "aggregate", "a confidence interval needs at least 2 games, got " +
                                                 std::to_string(values.size()));
  if (!(level > 0 && level < 1)) throw ConfigError("eval_harness", "aggregate", "level must lie in (0, 1)");
  const double m = mean_of(values);
  const double s = sd_of(values, m);
  const boost::math::students_t dist(static_cast<double>(values.size() - 1));
  const double t = boost::math::quantile(dist, (1.0 + level) / 2.0);
  return {m, t * s / std::sqrt(static_cast<double>(values.size())), values.size()};
}

double paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("eval_harness", "paired_t_test",
                "length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  if (a.size() < 2) throw Error("eval_harness", "paired_t_test", "need at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return 1.0;
  const double m = mean_of(d);
  const double s = sd_of(d, m);
  if (s == 0.0) return 0.0;
  const double t = m / (s / std::sqrt(static_cast<double>(d.size())));
  const boost::math::students_t dist(static_cast<double>(d.size() - 1));
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("eval_harness", "spearman", "length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = mean_of(rx);
  const double my = mean_of(ry);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error("eval_harness", "median", "empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace ogss::eval
