#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ssjl/stats.hpp"

using namespace ssjl;
using namespace ssjl::stats;

namespace {

// Independent route to the Clopper-Pearson bounds: bisection on binomial
// tail sums accumulated from log-pmf terms.
double binom_cdf(std::uint64_t k, std::uint64_t n, double p) {
  if (p <= 0) return 1.0;
  if (p >= 1) return k >= n ? 1.0 : 0.0;
  double sum = 0;
  for (std::uint64_t i = 0; i <= k; ++i) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                           i * std::log(p) + (n - i) * std::log1p(-p);
    sum += std::exp(log_pmf);
  }
  return std::min(sum, 1.0);
}

template <typename F>
double bisect(F increasing, double target) {
  double lo = 0, hi = 1;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (increasing(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Interval oracle_interval(std::uint64_t k, std::uint64_t n, double confidence) {
  const double half = (1 - confidence) / 2;
  Interval ci;
  // Pr[X >= k; p] = 1 - cdf(k-1) increases in p.
  ci.lower = k == 0 ? 0.0 : bisect([&](double p) { return 1 - binom_cdf(k - 1, n, p); }, half);
  // Pr[X <= k; p] decreases in p, so bisect its complement.
  ci.upper = k == n ? 1.0 : bisect([&](double p) { return 1 - binom_cdf(k, n, p); }, 1 - half);
  return ci;
}

}  // namespace

TEST(ClopperPearson, MatchesBisectionOracle) {
  for (std::uint64_t n : {1, 10, 57, 400, 2000})
    for (std::uint64_t k : {std::uint64_t{0}, std::uint64_t{1}, n / 7, n / 2, n - 1, n}) {
      if (k > n) continue;
      for (double conf : {0.9, 0.99}) {
        const auto ci = clopper_pearson(k, n, conf);
        const auto ref = oracle_interval(k, n, conf);
        EXPECT_NEAR(ci.lower, ref.lower, 1e-9) << k << "/" << n;
        EXPECT_NEAR(ci.upper, ref.upper, 1e-9) << k << "/" << n;
        const double phat = static_cast<double>(k) / n;
        EXPECT_LE(ci.lower, phat);
        EXPECT_GE(ci.upper, phat);
        EXPECT_GE(ci.lower, 0.0);
        EXPECT_LE(ci.upper, 1.0);
      }
    }
}

TEST(ClopperPearson, ClosedFormEdges) {
  // k = 0: upper = 1 - (alpha/2)^(1/n); k = n: lower = (alpha/2)^(1/n).
  const auto zero = clopper_pearson(0, 10, 0.99);
  EXPECT_EQ(zero.lower, 0.0);
  EXPECT_NEAR(zero.upper, 1 - std::pow(0.005, 0.1), 1e-13);
  const auto all = clopper_pearson(10, 10, 0.99);
  EXPECT_EQ(all.upper, 1.0);
  EXPECT_NEAR(all.lower, std::pow(0.005, 0.1), 1e-13);
}

TEST(ClopperPearson, Errors) {
  EXPECT_THROW(clopper_pearson(0, 0), ParameterError);
  EXPECT_THROW(clopper_pearson(5, 4), ParameterError);
  EXPECT_THROW(clopper_pearson(1, 4, 1.0), ParameterError);
}

TEST(NormalCriticalValue, NinetyNine) {
  EXPECT_NEAR(normal_critical_value(0.99), 2.5758293035489004, 1e-12);
  EXPECT_NEAR(normal_critical_value(0.95), 1.959963984540054, 1e-12);
}

TEST(MeanAndSe, KnownSample) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto est = mean_and_se(xs);
  EXPECT_DOUBLE_EQ(est.mean, 2.5);
  // sample variance 5/3
  EXPECT_NEAR(est.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(mean_and_se(std::vector<double>{7}).se, 0.0);
  const std::vector<double> ones(1000, 1.0);
  EXPECT_EQ(mean_and_se(ones).mean, 1.0);
  EXPECT_EQ(mean_and_se(ones).se, 0.0);
}

TEST(SortedQuantile, NearestRank) {
  const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(sorted_quantile(xs, 0.0), 1);
  EXPECT_EQ(sorted_quantile(xs, 0.5), 5);
  EXPECT_EQ(sorted_quantile(xs, 0.91), 10);
  EXPECT_EQ(sorted_quantile(xs, 1.0), 10);
  EXPECT_THROW(sorted_quantile(std::vector<double>{}, 0.5), ParameterError);
}

TEST(PairedDifference, HalfWidth) {
  // p1 = 0.3, p2 = 0.2: Var = (0.5 - 0.01)/n.
  const double h = paired_difference_halfwidth(300, 200, 1000, 0.99);
  EXPECT_NEAR(h, 2.5758293035489004 * std::sqrt(0.49 / 1000), 1e-12);
  EXPECT_EQ(paired_difference_halfwidth(0, 0, 10), 0.0);
}
