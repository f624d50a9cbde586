#pragma once

// Verification experiments: run an estimator, overlay the matching closed-form
// bound and attach pass/fail verdicts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssjl/bounds.hpp"
#include "ssjl/montecarlo.hpp"
#include "ssjl/params.hpp"
#include "ssjl/report.hpp"

namespace ssjl::experiments {

/// Allowance, in standard errors, for Monte Carlo means compared to a reference.
inline constexpr double kSigmaAllowance = 3.0;

/// How the fixed test vector of an experiment is built.
enum class VectorKind { uniform, random, basis };

inline std::string to_string(VectorKind kind) {
  switch (kind) {
    case VectorKind::uniform: return "uniform";
    case VectorKind::random: return "random";
    case VectorKind::basis: return "basis";
  }
  return "?";
}

/// uniform: every entry 1/sqrt(m). random: uniform on the sphere, drawn from
/// the stream (seed, 0, 0, test_vector) with a lane offset so it never
/// coincides with per-trial vectors. basis: e_0.
inline std::vector<double> make_test_vector(VectorKind kind, std::uint64_t m, std::uint64_t seed) {
  if (m < 1) throw ParameterError("m must be positive");
  switch (kind) {
    case VectorKind::uniform:
      return std::vector<double>(m, 1.0 / std::sqrt(static_cast<double>(m)));
    case VectorKind::random: {
      Stream rng(seed, ~std::uint64_t{0}, 0, StreamDomain::test_vector);
      return random_unit_vector(m, rng);
    }
    case VectorKind::basis: {
      std::vector<double> x(m, 0.0);
      x[0] = 1.0;
      return x;
    }
  }
  throw ParameterError("unknown vector kind");
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline bounds::VarianceProxy proxy_for(std::uint64_t d, std::uint64_t s) {
  return bounds::variance_proxy(static_cast<double>(s) / static_cast<double>(d), s);
}

inline void add_param_warnings(ExperimentReport& report, const JLParams& p) {
  if (!p.feasible())
    report.warnings.push_back("s^2 < d: sparsity below 1/s, the bound uses the unsimplified proxy");
  if (p.clamped) report.warnings.push_back("s clamped to d");
}

}  // namespace detail

struct Geometry {
  JLParams params;  // d and s used; epsilon/delta set only when derived
  std::uint64_t m = 0;
};

// ---------------------------------------------------------------------------

struct TailsConfig {
  Geometry geometry;
  VectorKind vector = VectorKind::uniform;
  /// Empty selects default_eps_grid(v, grid_points).
  std::vector<double> eps_grid;
  std::size_t grid_points = 16;
  std::uint64_t trials = 20000;
  /// Also enumerate the exact law and check CI coverage.
  bool exact = false;
  mc::RunOptions options;
};

struct TailsOutcome {
  ExperimentReport report;
  mc::TailEstimate estimate;
};

inline TailsOutcome run_tails(const TailsConfig& cfg) {
  detail::Stopwatch clock;
  const auto& p = cfg.geometry.params;
  const auto proxy = detail::proxy_for(p.d, p.s);
  const double v = proxy.v();
  const auto x = make_test_vector(cfg.vector, cfg.geometry.m, cfg.options.seed);
  const auto grid = cfg.eps_grid.empty() ? mc::default_eps_grid(v, cfg.grid_points) : cfg.eps_grid;

  TailsOutcome out;
  auto& report = out.report;
  report.kind = "tails";
  report.seed = cfg.options.seed;
  report.params = p;
  report.config = {{"m", cfg.geometry.m},          {"trials", cfg.trials},
                   {"vector", to_string(cfg.vector)}, {"exact", cfg.exact},
                   {"confidence", cfg.options.confidence}};
  detail::add_param_warnings(report, p);

  // Enumerate first so a capacity error surfaces before the long run.
  std::optional<mc::ExactDistribution> exact;
  if (cfg.exact) exact = mc::exact_tail_enumeration(p.d, cfg.geometry.m, p.s, x);

  out.estimate = mc::estimate_tail(p.d, cfg.geometry.m, p.s, x, grid, cfg.trials, cfg.options);
  const auto& est = out.estimate;

  std::vector<double> bound;
  for (double eps : grid) bound.push_back(bounds::hw_tail_bound(eps, v));

  report.estimates = {{"upper_tail", est.upper},
                      {"lower_tail", est.lower},
                      {"max_abs_energy", est.max_abs_energy}};
  report.overlays = {{"v", v},
                     {"v_squared", proxy.v_squared},
                     {"q_squared", proxy.q_squared},
                     {"simplified", proxy.simplified},
                     {"tail_bound", bound}};

  auto worst_excess = [&](const mc::TailCurve& curve) {
    double worst = -INFINITY;
    std::size_t at = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double excess = curve.ci_lower[k] - bound[k];
      if (excess > worst) {
        worst = excess;
        at = k;
      }
    }
    return std::pair{worst, at};
  };
  for (const auto* side : {&est.upper, &est.lower}) {
    const auto [worst, at] = worst_excess(*side);
    const std::string name = side == &est.upper ? "upper_tail_dominance" : "lower_tail_dominance";
    report.verdicts.push_back(Verdict::at_most(
        name, worst, 0.0,
        "max over grid of (CI lower - bound); worst at eps=" + std::to_string(grid[at])));
  }

  // Upper/lower frequency gap per grid point against the paired 99% half width.
  nlohmann::json symmetry = nlohmann::json::array();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double gap = std::abs(est.upper.probability(k) - est.lower.probability(k));
    const double half = stats::paired_difference_halfwidth(est.upper.counts[k], est.lower.counts[k],
                                                           cfg.trials, cfg.options.confidence);
    symmetry.push_back({{"eps", grid[k]}, {"gap", gap}, {"halfwidth", half}, {"within", gap <= half}});
  }
  report.estimates["tail_symmetry"] = symmetry;

  if (exact) {
    std::vector<double> exact_upper, exact_lower;
    std::size_t uncovered_upper = 0, uncovered_lower = 0;
    double min_atom_distance = INFINITY;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      exact_upper.push_back(exact->upper_tail(grid[k]));
      exact_lower.push_back(exact->lower_tail(grid[k]));
      if (!(est.upper.ci_lower[k] <= exact_upper[k] && exact_upper[k] <= est.upper.ci_upper[k]))
        ++uncovered_upper;
      if (!(est.lower.ci_lower[k] <= exact_lower[k] && exact_lower[k] <= est.lower.ci_upper[k]))
        ++uncovered_lower;
      min_atom_distance = std::min({min_atom_distance, exact->distance_to_atom(grid[k]),
                                    exact->distance_to_atom(-grid[k])});
    }
    if (min_atom_distance < 1e-9)
      report.warnings.push_back("an eps grid point sits on an atom of the exact law");
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : exact->atoms) atoms.push_back({{"value", a.value}, {"probability", a.probability}});
    report.overlays["exact"] = {{"configurations", exact->configurations},
                                {"atoms", atoms},
                                {"upper_tail", exact_upper},
                                {"lower_tail", exact_lower}};
    report.verdicts.push_back(Verdict::at_most("exact_upper_coverage",
                                               static_cast<double>(uncovered_upper), 0.0,
                                               "grid points whose CI misses the exact probability"));
    report.verdicts.push_back(Verdict::at_most("exact_lower_coverage",
                                               static_cast<double>(uncovered_lower), 0.0,
                                               "grid points whose CI misses the exact probability"));
  }
  report.wall_clock_seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------

struct DjlConfig {
  JLParams params;  // must carry epsilon and delta
  std::uint64_t m = 1000;
  std::uint64_t trials = 2000;
  /// nullopt: fresh random unit vector per trial.
  std::optional<VectorKind> fixed_vector;
  mc::RunOptions options;
};

struct DjlOutcome {
  ExperimentReport report;
  mc::DjlResult result;
};

inline DjlOutcome run_djl(const DjlConfig& cfg) {
  detail::Stopwatch clock;
  DjlOutcome out;
  const auto source = cfg.fixed_vector
                          ? mc::XSource::fixed_vector(make_test_vector(*cfg.fixed_vector, cfg.m, cfg.options.seed))
                          : mc::XSource::random_unit();
  out.result = mc::verify_djl(cfg.params, cfg.m, cfg.trials, source, cfg.options);
  const auto& r = out.result;

  auto& report = out.report;
  report.kind = "djl";
  report.seed = cfg.options.seed;
  report.params = cfg.params;
  report.config = {{"m", cfg.m},
                   {"trials", cfg.trials},
                   {"vector", cfg.fixed_vector ? to_string(*cfg.fixed_vector) : "random-per-trial"},
                   {"confidence", cfg.options.confidence}};
  report.warnings = r.warnings;
  double max_abs = 0;
  for (double e : r.energies) max_abs = std::max(max_abs, std::abs(e));
  const auto doubled = r.failures_at(2.0 * cfg.params.epsilon);
  report.estimates = {{"failures", r.failures},
                      {"failure_rate", r.failure_rate},
                      {"ci_lower", r.ci.lower},
                      {"ci_upper", r.ci.upper},
                      {"max_abs_energy", max_abs},
                      {"failures_at_double_epsilon", doubled}};
  const auto proxy = detail::proxy_for(cfg.params.d, cfg.params.s);
  report.overlays = {{"delta", cfg.params.delta},
                     {"v", proxy.v()},
                     {"two_sided_tail_bound", std::min(1.0, 2.0 * bounds::hw_tail_bound(cfg.params.epsilon, proxy.v()))}};
  report.verdicts.push_back(Verdict::at_most("djl_failure_rate", r.ci.upper, cfg.params.delta,
                                             "99% upper confidence bound on Pr[|E(x)| > eps]"));
  report.wall_clock_seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------

struct MomentsConfig {
  JLParams params;
  std::uint64_t trials = 100000;
  mc::RunOptions options;
};

struct MomentsOutcome {
  ExperimentReport report;
  mc::MomentEstimate estimate;
};

inline MomentsOutcome run_moments(const MomentsConfig& cfg) {
  detail::Stopwatch clock;
  MomentsOutcome out;
  const auto& p = cfg.params;
  out.estimate = mc::estimate_moment_Q(p.d, p.s, cfg.trials, cfg.options);
  const auto& est = out.estimate;
  const auto proxy = detail::proxy_for(p.d, p.s);
  const auto exact = mc::exact_overlap_moments(p.d, p.s);

  auto& report = out.report;
  report.kind = "moments";
  report.seed = cfg.options.seed;
  report.params = p;
  report.config = {{"trials", cfg.trials}};
  detail::add_param_warnings(report, p);
  report.estimates = {{"mean_q", est.q.mean},
                      {"mean_q_se", est.q.se},
                      {"mean_q_squared", est.q_squared.mean},
                      {"mean_q_squared_se", est.q_squared.se}};
  report.overlays = {{"q_squared_bound", proxy.q_squared},
                     {"v_squared", proxy.v_squared},
                     {"exact_mean_q", exact.mean_q},
                     {"exact_mean_q_squared", exact.mean_q_squared}};
  report.verdicts.push_back(Verdict::at_most(
      "moment_bound", est.q_squared.mean - kSigmaAllowance * est.q_squared.se, proxy.q_squared,
      "mean Q^2 - 3 SE against p^2 + p(1-p)/s"));
  report.verdicts.push_back(Verdict::at_most(
      "moment_exact_agreement", std::abs(est.q_squared.mean - exact.mean_q_squared),
      kSigmaAllowance * est.q_squared.se + 1e-12, "|mean Q^2 - exact E Q^2| against 3 SE"));
  report.wall_clock_seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------

struct MgfConfig {
  Geometry geometry;
  VectorKind vector = VectorKind::uniform;
  /// Empty selects default_t_grid(v, t_points).
  std::vector<double> t_grid;
  std::size_t t_points = 8;
  std::uint64_t trials = 20000;
  bool exact = false;
  mc::RunOptions options;
};

struct MgfOutcome {
  ExperimentReport report;
  mc::MgfEstimate estimate;
};

inline MgfOutcome run_mgf(const MgfConfig& cfg) {
  detail::Stopwatch clock;
  MgfOutcome out;
  const auto& p = cfg.geometry.params;
  const auto proxy = detail::proxy_for(p.d, p.s);
  const auto x = make_test_vector(cfg.vector, cfg.geometry.m, cfg.options.seed);
  const auto grid = cfg.t_grid.empty() ? mc::default_t_grid(proxy.v(), cfg.t_points) : cfg.t_grid;

  std::optional<mc::ExactDistribution> exact;
  if (cfg.exact) exact = mc::exact_tail_enumeration(p.d, cfg.geometry.m, p.s, x);

  out.estimate = mc::estimate_mgf(p.d, cfg.geometry.m, p.s, x, grid, cfg.trials, cfg.options);
  const auto& est = out.estimate;

  auto& report = out.report;
  report.kind = "mgf";
  report.seed = cfg.options.seed;
  report.params = p;
  report.config = {{"m", cfg.geometry.m},
                   {"trials", cfg.trials},
                   {"vector", to_string(cfg.vector)},
                   {"exact", cfg.exact}};
  detail::add_param_warnings(report, p);
  report.estimates = {{"points", est.points}};
  report.overlays = {{"v", est.v}, {"radius", bounds::quadform_mgf_radius(est.v)}};

  double worst = -INFINITY;
  for (const auto& pt : est.points)
    worst = std::max(worst, pt.mean - kSigmaAllowance * pt.se - pt.bound);
  report.verdicts.push_back(Verdict::at_most("mgf_dominance", worst, 0.0,
                                             "max over t of (mean - 3 SE - bound)"));
  if (exact) {
    std::vector<double> exact_mgf;
    double worst_gap = -INFINITY;
    for (const auto& pt : est.points) {
      exact_mgf.push_back(exact->mgf(pt.t));
      worst_gap = std::max(worst_gap, std::abs(pt.mean - exact_mgf.back()) -
                                          kSigmaAllowance * pt.se - 1e-12);
    }
    report.overlays["exact_mgf"] = exact_mgf;
    report.verdicts.push_back(Verdict::at_most("mgf_exact_agreement", worst_gap, 0.0,
                                               "max over t of (|mean - exact| - 3 SE)"));
  }
  report.wall_clock_seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------

struct BaselineConfig {
  std::uint64_t d = 512;
  std::uint64_t m = 64;
  /// 0 selects the smallest feasible s, ceil(sqrt(d)).
  std::uint64_t s = 0;
  VectorKind vector = VectorKind::uniform;
  std::uint64_t trials = 10000;
  mc::RunOptions options;
};

inline ExperimentReport run_baseline(const BaselineConfig& cfg) {
  detail::Stopwatch clock;
  const std::uint64_t s = cfg.s == 0 ? mc::min_feasible_sparsity(cfg.d) : cfg.s;
  const auto x = make_test_vector(cfg.vector, cfg.m, cfg.options.seed);
  const auto cmp = mc::compare_baseline(cfg.d, cfg.m, s, x, cfg.trials, cfg.options);

  ExperimentReport report;
  report.kind = "baseline";
  report.seed = cfg.options.seed;
  report.params = explicit_parameters(cfg.d, s);
  report.config = {{"m", cfg.m}, {"trials", cfg.trials}, {"vector", to_string(cfg.vector)}};
  report.estimates = {{"sparse", cmp.sparse}, {"dense", cmp.dense}};
  report.wall_clock_seconds = clock.seconds();
  return report;
}

}  // namespace ssjl::experiments
