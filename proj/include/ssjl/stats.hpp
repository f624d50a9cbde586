#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "ssjl/error.hpp"

namespace ssjl::stats {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;

  bool contains(double value) const noexcept { return lower <= value && value <= upper; }
};

/// Exact two-sided Clopper-Pearson interval for k successes in n trials:
/// lower = Beta^{-1}(alpha/2; k, n-k+1), upper = Beta^{-1}(1-alpha/2; k+1, n-k).
inline Interval clopper_pearson(std::uint64_t k, std::uint64_t n, double confidence = 0.99) {
  if (n == 0) throw ParameterError("clopper_pearson: n must be positive");
  if (k > n) throw ParameterError("clopper_pearson: k exceeds n");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ParameterError("clopper_pearson: confidence must lie in (0,1)");
  const double alpha = 1.0 - confidence;
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  Interval ci;
  ci.lower = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, alpha / 2.0);
  ci.upper = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - alpha / 2.0);
  return ci;
}

/// Two-sided standard normal critical value, e.g. 2.5758 at 0.99.
inline double normal_critical_value(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0))
    throw ParameterError("normal_critical_value: confidence must lie in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>{},
                               0.5 + confidence / 2.0);
}

struct MeanEstimate {
  double mean = 0.0;
  /// Standard error of the mean, sample standard deviation / sqrt(n).
  double se = 0.0;
  std::uint64_t n = 0;
};

/// Two-pass mean and standard error over the samples in order.
inline MeanEstimate mean_and_se(std::span<const double> samples) {
  MeanEstimate est;
  est.n = samples.size();
  if (samples.empty()) return est;
  long double sum = 0;
  for (double x : samples) sum += x;
  const long double mean = sum / static_cast<long double>(samples.size());
  est.mean = static_cast<double>(mean);
  if (samples.size() < 2) return est;
  long double ss = 0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const long double var = ss / static_cast<long double>(samples.size() - 1);
  est.se = static_cast<double>(std::sqrt(var / static_cast<long double>(samples.size())));
  return est;
}

/// Nearest-rank quantile of already sorted data, q in [0, 1].
inline double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ParameterError("sorted_quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("sorted_quantile: q outside [0,1]");
  if (q == 0.0) return sorted.front();
  const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
  return sorted[std::min(rank, sorted.size()) - 1];
}

/// Normal-approximation half width for the difference of two mutually
/// exclusive outcome frequencies observed on the same n trials:
/// Var(p1_hat - p2_hat) = (p1 + p2 - (p1 - p2)^2) / n.
inline double paired_difference_halfwidth(std::uint64_t k1, std::uint64_t k2, std::uint64_t n,
                                          double confidence = 0.99) {
  if (n == 0) throw ParameterError("paired_difference_halfwidth: n must be positive");
  const double p1 = static_cast<double>(k1) / static_cast<double>(n);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n);
  const double var = std::max(0.0, p1 + p2 - (p1 - p2) * (p1 - p2)) / static_cast<double>(n);
  return normal_critical_value(confidence) * std::sqrt(var);
}

}  // namespace ssjl::stats
