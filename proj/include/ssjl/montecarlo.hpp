#pragma once

// Monte Carlo estimators for the distortion energy E(x) = ||Ax||^2 - 1 and
// the column overlaps, plus exhaustive enumeration for tiny configurations.
//
// Trial k always draws its matrix from the streams keyed by (seed, k), so the
// per-trial values, and every aggregate computed from them in trial order,
// do not depend on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ssjl/bounds.hpp"
#include "ssjl/error.hpp"
#include "ssjl/params.hpp"
#include "ssjl/rng.hpp"
#include "ssjl/sampler.hpp"
#include "ssjl/stats.hpp"
#include "ssjl/transform.hpp"

namespace ssjl::mc {

inline constexpr std::uint64_t kDefaultSeed = 20190601;

struct RunOptions {
  std::uint64_t seed = kDefaultSeed;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
  double confidence = 0.99;
};

/// Runs body(trial) for trial in [0, trials) on up to `threads` workers, each
/// owning a contiguous block. The first exception thrown by any worker is
/// rethrown after all workers finish.
inline void parallel_trials(std::uint64_t trials, unsigned threads,
                            const std::function<void(std::uint64_t)>& body) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1)));
  if (workers <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    pool.emplace_back([&, begin, end] {
      try {
        for (std::uint64_t t = begin; t < end; ++t) body(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Overlap moments

struct OverlapMoments {
  double mean_q = 0.0;
  double mean_q_squared = 0.0;
};

/// Exact moments of Q = |S intersect S'| / s for independent uniform s-subsets
/// of [0, d); the overlap is hypergeometric(d, s, s).
inline OverlapMoments exact_overlap_moments(std::uint64_t d, std::uint64_t s) {
  detail::check_support_args(d, s);
  const auto dd = static_cast<double>(d);
  const auto sd = static_cast<double>(s);
  const double mean_k = sd * sd / dd;
  const double var_k = d == 1 ? 0.0 : sd * (sd / dd) * ((dd - sd) / dd) * ((dd - sd) / (dd - 1.0));
  return {mean_k / sd, (var_k + mean_k * mean_k) / (sd * sd)};
}

struct MomentEstimate {
  std::uint64_t d = 0;
  std::uint64_t s = 0;
  stats::MeanEstimate q;
  stats::MeanEstimate q_squared;
};

/// Samples `trials` independent column pairs and averages Q and Q^2.
inline MomentEstimate estimate_moment_Q(std::uint64_t d, std::uint64_t s, std::uint64_t trials,
                                        const RunOptions& options = {}) {
  if (trials == 0) throw ParameterError("estimate_moment_Q: trials must be positive");
  detail::check_support_args(d, s);
  std::vector<double> q(trials), q2(trials);
  parallel_trials(trials, options.threads, [&](std::uint64_t t) {
    const auto A = sample_matrix(d, 2, s, {options.seed, t});
    q[t] = gram_overlap(A, 0, 1);
    q2[t] = q[t] * q[t];
  });
  return {d, s, stats::mean_and_se(q), stats::mean_and_se(q2)};
}

// ---------------------------------------------------------------------------
// Tails

struct TailCurve {
  std::vector<double> eps_grid;
  std::vector<std::uint64_t> counts;
  std::uint64_t trials = 0;
  double confidence = 0.99;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;

  double probability(std::size_t k) const {
    return static_cast<double>(counts.at(k)) / static_cast<double>(trials);
  }
};

inline void check_eps_grid(std::span<const double> grid) {
  if (grid.empty()) throw ParameterError("eps grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] > 0.0) || !std::isfinite(grid[k]))
      throw ParameterError("eps grid points must be positive and finite");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw ParameterError("eps grid must be strictly increasing");
  }
}

inline TailCurve make_tail_curve(std::vector<double> grid, std::vector<std::uint64_t> counts,
                                 std::uint64_t trials, double confidence) {
  TailCurve curve;
  curve.eps_grid = std::move(grid);
  curve.counts = std::move(counts);
  curve.trials = trials;
  curve.confidence = confidence;
  for (auto k : curve.counts) {
    const auto ci = stats::clopper_pearson(k, trials, confidence);
    curve.ci_lower.push_back(ci.lower);
    curve.ci_upper.push_back(ci.upper);
  }
  return curve;
}

/// `points` log-spaced values from v/4 to 16 v.
inline std::vector<double> default_eps_grid(double v, std::size_t points = 16) {
  if (!(v > 0.0)) throw ParameterError("default_eps_grid: v must be positive");
  if (points < 2) throw ParameterError("default_eps_grid: need at least two points");
  std::vector<double> grid(points);
  const double lo = std::log(v / 4.0);
  const double hi = std::log(16.0 * v);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = std::exp(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
  return grid;
}

/// Counts of samples strictly above eps (upper) and strictly below -eps (lower).
inline std::pair<TailCurve, TailCurve> tail_curves(std::span<const double> samples,
                                                   const std::vector<double>& grid,
                                                   double confidence) {
  check_eps_grid(grid);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint64_t> upper, lower;
  for (double eps : grid) {
    upper.push_back(static_cast<std::uint64_t>(
        sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), eps)));
    lower.push_back(static_cast<std::uint64_t>(
        std::lower_bound(sorted.begin(), sorted.end(), -eps) - sorted.begin()));
  }
  return {make_tail_curve(grid, std::move(upper), samples.size(), confidence),
          make_tail_curve(grid, std::move(lower), samples.size(), confidence)};
}

struct TailEstimate {
  TailCurve upper;
  TailCurve lower;
  /// E(x) per trial, in trial order.
  std::vector<double> energies;
  double max_abs_energy = 0.0;
};

/// Samples a fresh matrix per trial and records E(x) for the fixed unit x.
inline std::vector<double> sample_energies(std::uint64_t d, std::uint64_t m, std::uint64_t s,
                                           std::span<const double> x, std::uint64_t trials,
                                           const RunOptions& options) {
  if (trials == 0) throw ParameterError("trials must be positive");
  detail::check_support_args(d, s);
  if (x.size() != m) throw ShapeError("test vector dimension does not match m");
  ssjl::detail::check_unit(x);
  std::vector<double> energies(trials);
  parallel_trials(trials, options.threads, [&](std::uint64_t t) {
    energies[t] = distortion_energy(sample_matrix(d, m, s, {options.seed, t}), x);
  });
  return energies;
}

inline TailEstimate estimate_tail(std::uint64_t d, std::uint64_t m, std::uint64_t s,
                                  std::span<const double> x, const std::vector<double>& eps_grid,
                                  std::uint64_t trials, const RunOptions& options = {}) {
  check_eps_grid(eps_grid);
  TailEstimate est;
  est.energies = sample_energies(d, m, s, x, trials, options);
  auto [upper, lower] = tail_curves(est.energies, eps_grid, options.confidence);
  est.upper = std::move(upper);
  est.lower = std::move(lower);
  for (double e : est.energies) est.max_abs_energy = std::max(est.max_abs_energy, std::abs(e));
  return est;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration

struct Atom {
  double value = 0.0;
  double probability = 0.0;
};

struct ExactDistribution {
  /// Sorted by value; values closer than 1e-12 are merged.
  std::vector<Atom> atoms;
  std::uint64_t configurations = 0;

  double upper_tail(double eps) const {
    double p = 0;
    for (const auto& a : atoms)
      if (a.value > eps) p += a.probability;
    return p;
  }
  double lower_tail(double eps) const {
    double p = 0;
    for (const auto& a : atoms)
      if (a.value < -eps) p += a.probability;
    return p;
  }
  double mgf(double t) const {
    double sum = 0;
    for (const auto& a : atoms) sum += a.probability * std::exp(t * a.value);
    return sum;
  }
  /// Smallest distance from eps to an atom; used to keep grid points off atoms.
  double distance_to_atom(double eps) const {
    double best = INFINITY;
    for (const auto& a : atoms) best = std::min(best, std::abs(a.value - eps));
    return best;
  }
};

inline constexpr std::uint64_t kEnumerationLimit = 1'000'000;

/// Exact law of E(x) over all C(d,s)^m support choices and 2^m sign patterns,
/// all equally likely. E is evaluated from the overlap definition,
/// sum_{j != j'} |S_j intersect S_j'| / s * sign_j sign_j' x_j x_j'.
inline ExactDistribution exact_tail_enumeration(std::uint64_t d, std::uint64_t m, std::uint64_t s,
                                                std::span<const double> x,
                                                std::uint64_t limit = kEnumerationLimit) {
  detail::check_support_args(d, s);
  if (m < 1) throw ParameterError("m must be positive");
  if (x.size() != m) throw ShapeError("test vector dimension does not match m");
  ssjl::detail::check_unit(x);

  // C(d, s) via the multiplicative formula, in floating point for the guard.
  double subsets_real = 1.0;
  for (std::uint64_t k = 1; k <= s; ++k)
    subsets_real = subsets_real * static_cast<double>(d - s + k) / static_cast<double>(k);
  subsets_real = std::round(subsets_real);
  const double total_real = std::pow(subsets_real, static_cast<double>(m)) *
                            std::pow(2.0, static_cast<double>(m));
  if (!(total_real <= static_cast<double>(limit)))
    throw CapacityError("enumeration needs " + std::to_string(total_real) +
                        " configurations, limit is " + std::to_string(limit));

  // All s-subsets in lexicographic order.
  std::vector<std::vector<std::uint32_t>> subsets;
  std::vector<std::uint32_t> comb(s);
  std::iota(comb.begin(), comb.end(), 0u);
  while (true) {
    subsets.push_back(comb);
    std::int64_t i = static_cast<std::int64_t>(s) - 1;
    while (i >= 0 && comb[i] == d - s + static_cast<std::uint64_t>(i)) --i;
    if (i < 0) break;
    ++comb[i];
    for (std::uint64_t k = static_cast<std::uint64_t>(i) + 1; k < s; ++k) comb[k] = comb[k - 1] + 1;
  }
  const std::size_t n_sub = subsets.size();

  std::vector<std::uint32_t> overlap;
  if (m >= 2) {
    overlap.resize(n_sub * n_sub);
    for (std::size_t a = 0; a < n_sub; ++a)
      for (std::size_t b = 0; b < n_sub; ++b) {
        std::vector<std::uint32_t> common;
        std::set_intersection(subsets[a].begin(), subsets[a].end(), subsets[b].begin(),
                              subsets[b].end(), std::back_inserter(common));
        overlap[a * n_sub + b] = static_cast<std::uint32_t>(common.size());
      }
  }

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(total_real));
  std::vector<std::size_t> choice(m, 0);
  const std::uint64_t sign_patterns = 1ULL << m;
  const long double inv_s = 1.0L / static_cast<long double>(s);
  while (true) {
    for (std::uint64_t pattern = 0; pattern < sign_patterns; ++pattern) {
      long double e = 0;
      for (std::uint64_t j = 0; j < m; ++j)
        for (std::uint64_t jp = j + 1; jp < m; ++jp) {
          const int sj = (pattern >> j) & 1 ? -1 : 1;
          const int sjp = (pattern >> jp) & 1 ? -1 : 1;
          e += 2.0L * overlap[choice[j] * n_sub + choice[jp]] * inv_s * sj * sjp * x[j] * x[jp];
        }
      values.push_back(static_cast<double>(e));
    }
    std::size_t j = 0;
    while (j < m && ++choice[j] == n_sub) choice[j++] = 0;
    if (j == m) break;
  }

  ExactDistribution dist;
  dist.configurations = values.size();
  std::sort(values.begin(), values.end());
  const double weight = 1.0 / static_cast<double>(values.size());
  for (std::size_t k = 0; k < values.size();) {
    std::size_t end = k;
    while (end < values.size() && values[end] - values[k] <= 1e-12) ++end;
    dist.atoms.push_back({values[k], static_cast<double>(end - k) * weight});
    k = end;
  }
  return dist;
}

// ---------------------------------------------------------------------------
// Distributional JL

/// Where the test vector of each trial comes from.
struct XSource {
  /// Empty: fresh uniformly random unit vector per trial. Otherwise a fixed unit vector.
  std::vector<double> fixed;

  static XSource random_unit() { return {}; }
  static XSource fixed_vector(std::vector<double> x) { return {std::move(x)}; }
  bool is_random() const noexcept { return fixed.empty(); }
};

struct DjlResult {
  JLParams params;
  std::uint64_t m = 0;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double failure_rate = 0.0;
  stats::Interval ci;
  /// ci.upper <= delta.
  bool pass = false;
  std::vector<double> energies;
  std::vector<std::string> warnings;

  /// Number of trials with |E(x)| > eps, for re-thresholding the same draws.
  std::uint64_t failures_at(double eps) const {
    return static_cast<std::uint64_t>(std::count_if(
        energies.begin(), energies.end(), [eps](double e) { return std::abs(e) > eps; }));
  }
};

inline DjlResult verify_djl(const JLParams& params, std::uint64_t m, std::uint64_t trials,
                            const XSource& source, const RunOptions& options = {}) {
  if (!(params.epsilon > 0.0 && params.epsilon < 1.0 && params.delta > 0.0 && params.delta < 1.0))
    throw ParameterError("verify_djl: parameters must carry epsilon and delta in (0,1)");
  if (trials == 0) throw ParameterError("verify_djl: trials must be positive");
  if (m < 1) throw ParameterError("verify_djl: m must be positive");
  detail::check_support_args(params.d, params.s);
  if (!source.is_random()) {
    if (source.fixed.size() != m) throw ShapeError("fixed test vector dimension does not match m");
    ssjl::detail::check_unit(source.fixed);
  }

  DjlResult result;
  result.params = params;
  result.m = m;
  result.trials = trials;
  if (!params.feasible()) result.warnings.push_back("parameters infeasible: s^2 < d");
  if (params.clamped) result.warnings.push_back("s clamped to d");

  result.energies.resize(trials);
  parallel_trials(trials, options.threads, [&](std::uint64_t t) {
    const auto A = sample_matrix(params.d, m, params.s, {options.seed, t});
    if (source.is_random()) {
      Stream rng(options.seed, t, 0, StreamDomain::test_vector);
      const auto x = random_unit_vector(m, rng);
      result.energies[t] = distortion_energy(A, x);
    } else {
      result.energies[t] = distortion_energy(A, source.fixed);
    }
  });
  result.failures = result.failures_at(params.epsilon);
  result.failure_rate = static_cast<double>(result.failures) / static_cast<double>(trials);
  result.ci = stats::clopper_pearson(result.failures, trials, options.confidence);
  result.pass = result.ci.upper <= params.delta;
  return result;
}

// ---------------------------------------------------------------------------
// Moment generating function

struct MgfPoint {
  double t = 0.0;
  double mean = 0.0;
  double se = 0.0;
  double bound = 0.0;
};

struct MgfEstimate {
  /// Variance proxy v used for the bound.
  double v = 0.0;
  std::vector<MgfPoint> points;
  std::vector<double> energies;
};

/// `points` values evenly spread over [-0.9 r, 0.9 r], r = 1/(4v) the radius of
/// the MGF bound.
inline std::vector<double> default_t_grid(double v, std::size_t points = 8) {
  if (points < 2) throw ParameterError("default_t_grid: need at least two points");
  const double r = bounds::quadform_mgf_radius(v);
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k)
    grid[k] = r * (-0.9 + 1.8 * static_cast<double>(k) / static_cast<double>(points - 1));
  return grid;
}

inline MgfEstimate estimate_mgf(std::uint64_t d, std::uint64_t m, std::uint64_t s,
                                std::span<const double> x, const std::vector<double>& t_grid,
                                std::uint64_t trials, const RunOptions& options = {}) {
  detail::check_support_args(d, s);
  const auto proxy =
      bounds::variance_proxy(static_cast<double>(s) / static_cast<double>(d), s);
  MgfEstimate est;
  est.v = proxy.v();
  for (double t : t_grid)
    if (!(std::isfinite(t) && 4.0 * std::abs(t) * est.v < 1.0))
      throw ParameterError("estimate_mgf: t=" + std::to_string(t) +
                           " outside the MGF bound domain 4|t|v < 1");
  est.energies = sample_energies(d, m, s, x, trials, options);
  std::vector<double> terms(trials);
  for (double t : t_grid) {
    MgfPoint point;
    point.t = t;
    if (t == 0.0) {
      point.mean = 1.0;
    } else {
      for (std::uint64_t k = 0; k < trials; ++k) terms[k] = std::exp(t * est.energies[k]);
      const auto mean = stats::mean_and_se(terms);
      point.mean = mean.mean;
      point.se = mean.se;
    }
    point.bound = bounds::quadform_mgf_bound(t, est.v);
    est.points.push_back(point);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Dense baseline

inline const std::vector<double>& baseline_quantile_levels() {
  static const std::vector<double> levels{0.5, 0.9, 0.99, 0.999, 1.0};
  return levels;
}

struct DistortionSummary {
  /// |E(x)| at baseline_quantile_levels().
  std::vector<double> abs_quantiles;
  double mean_abs = 0.0;
};

struct BaselineComparison {
  std::uint64_t d = 0;
  std::uint64_t m = 0;
  std::uint64_t s = 0;
  std::uint64_t trials = 0;
  DistortionSummary sparse;
  DistortionSummary dense;
};

/// E(x) for a dense d x m matrix with independent +-1/sqrt(d) entries drawn
/// from the streams (seed, trial, column).
inline double dense_rademacher_energy(std::uint64_t d, std::span<const double> x,
                                      const SeedSpec& seed) {
  std::vector<long double> acc(d, 0.0L);
  for (std::uint64_t j = 0; j < x.size(); ++j) {
    Stream rng(seed, j, StreamDomain::dense_baseline);
    std::uint64_t bits = 0;
    for (std::uint64_t i = 0; i < d; ++i) {
      if (i % 64 == 0) bits = rng.next();
      acc[i] += (bits & 1) ? x[j] : -x[j];
      bits >>= 1;
    }
  }
  long double sum = 0;
  for (auto a : acc) sum += a * a;
  return static_cast<double>(sum / static_cast<long double>(d) - 1.0L);
}

inline DistortionSummary summarize_abs(std::vector<double> energies) {
  DistortionSummary summary;
  for (auto& e : energies) e = std::abs(e);
  std::sort(energies.begin(), energies.end());
  for (double q : baseline_quantile_levels())
    summary.abs_quantiles.push_back(stats::sorted_quantile(energies, q));
  summary.mean_abs = stats::mean_and_se(energies).mean;
  return summary;
}

/// Informational comparison of the sparse transform (s nonzeros per column)
/// against a dense Rademacher matrix of the same output dimension.
inline BaselineComparison compare_baseline(std::uint64_t d, std::uint64_t m, std::uint64_t s,
                                           std::span<const double> x, std::uint64_t trials,
                                           const RunOptions& options = {}) {
  BaselineComparison cmp{d, m, s, trials, {}, {}};
  auto sparse = sample_energies(d, m, s, x, trials, options);
  std::vector<double> dense(trials);
  parallel_trials(trials, options.threads, [&](std::uint64_t t) {
    dense[t] = dense_rademacher_energy(d, x, {options.seed, t});
  });
  cmp.sparse = summarize_abs(std::move(sparse));
  cmp.dense = summarize_abs(std::move(dense));
  return cmp;
}

/// Smallest s with s^2 >= d.
inline std::uint64_t min_feasible_sparsity(std::uint64_t d) {
  auto s = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(d)));
  while (s * s < d) ++s;
  while (s > 1 && (s - 1) * (s - 1) >= d) --s;
  return std::max<std::uint64_t>(s, 1);
}

}  // namespace ssjl::mc
