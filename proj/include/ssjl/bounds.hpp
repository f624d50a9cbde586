#pragma once

// Closed-form concentration bounds. Tail bounds are computed as log
// probabilities first; the probability accessors exponentiate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "ssjl/error.hpp"

namespace ssjl::bounds {

struct SubGammaParams {
  /// Variance factor v (the bound uses v^2).
  double v = 0.0;
  /// Scale c.
  double c = 0.0;
};

namespace detail {

inline void require_eps(double eps, const char* who) {
  if (!(eps >= 0.0) || std::isinf(eps))
    throw ParameterError(std::string(who) + ": eps must be a finite nonnegative number");
}

inline void require_positive(double value, const char* who, const char* name) {
  if (!(value > 0.0) || std::isinf(value))
    throw ParameterError(std::string(who) + ": " + name + " must be positive and finite");
}

}  // namespace detail

/// log of exp(-min(eps^2 / (128 v^2), eps / (16 v))).
inline double hw_tail_log_bound(double eps, double v) {
  detail::require_eps(eps, "hw_tail_bound");
  detail::require_positive(v, "hw_tail_bound", "v");
  return -std::min(eps * eps / (128.0 * v * v), eps / (16.0 * v));
}

/// Tail of the off-diagonal Rademacher quadratic form, either side.
inline double hw_tail_bound(double eps, double v) { return std::exp(hw_tail_log_bound(eps, v)); }

inline double subgaussian_tail_log_bound(double eps, double v) {
  detail::require_eps(eps, "subgaussian_tail_bound");
  detail::require_positive(v, "subgaussian_tail_bound", "v");
  return -eps * eps / (2.0 * v * v);
}

/// Pr[|X| > eps] for X sub-gaussian with variance factor v^2.
inline double subgaussian_tail_bound(double eps, double v) {
  return std::exp(subgaussian_tail_log_bound(eps, v));
}

/// log of exp(-min(eps^2 / (4 v^2), eps / (4 c))); quadratic branch below
/// eps = v^2 / c, linear above.
inline double subgamma_tail_log_bound(double eps, const SubGammaParams& params) {
  detail::require_eps(eps, "subgamma_tail_bound");
  detail::require_positive(params.v, "subgamma_tail_bound", "v");
  detail::require_positive(params.c, "subgamma_tail_bound", "c");
  return -std::min(eps * eps / (4.0 * params.v * params.v), eps / (4.0 * params.c));
}

inline double subgamma_tail_bound(double eps, const SubGammaParams& params) {
  return std::exp(subgamma_tail_log_bound(eps, params));
}

/// E exp(t X^2) <= exp(2 t v^2 / (1 - 2 t v^2)) for X sub-gaussian(v^2), 0 <= 2 t v^2 < 1.
inline double subgauss_square_mgf_bound(double t, double v) {
  if (!(t >= 0.0)) throw ParameterError("subgauss_square_mgf_bound: t must be nonnegative");
  if (!(v >= 0.0) || std::isinf(v))
    throw ParameterError("subgauss_square_mgf_bound: v must be nonnegative and finite");
  const double a = 2.0 * t * v * v;
  if (!(a < 1.0))
    throw ParameterError("subgauss_square_mgf_bound: requires 2 t v^2 < 1, got " + std::to_string(a));
  return std::exp(a / (1.0 - a));
}

/// E exp(t E(x)) <= exp(16 t^2 v^2 / (1 - 16 t^2 v^2)) for 4 |t| v < 1.
inline double quadform_mgf_bound(double t, double v) {
  if (!std::isfinite(t)) throw ParameterError("quadform_mgf_bound: t must be finite");
  if (!(v >= 0.0) || std::isinf(v))
    throw ParameterError("quadform_mgf_bound: v must be nonnegative and finite");
  if (!(4.0 * std::abs(t) * v < 1.0))
    throw ParameterError("quadform_mgf_bound: requires 4 |t| v < 1");
  const double a = 16.0 * t * t * v * v;
  return std::exp(a / (1.0 - a));
}

/// Largest |t| accepted by quadform_mgf_bound (exclusive).
inline double quadform_mgf_radius(double v) {
  detail::require_positive(v, "quadform_mgf_radius", "v");
  return 1.0 / (4.0 * v);
}

/// Sub-gamma parametrization implied by the quadratic-form MGF bound:
/// variance factor sqrt(32 v^2), scale 4 v.
inline SubGammaParams quadform_subgamma(double v) {
  detail::require_positive(v, "quadform_subgamma", "v");
  return {std::sqrt(32.0 * v * v), 4.0 * v};
}

struct VarianceProxy {
  /// p^2 + p (1 - p) / s, the bound on E Q^2 for an off-diagonal overlap.
  double q_squared = 0.0;
  /// 2 p^2 when p >= 1/s, else q_squared.
  double v_squared = 0.0;
  bool simplified = false;

  double v() const { return std::sqrt(v_squared); }
};

inline VarianceProxy variance_proxy(double p, std::uint64_t s) {
  if (!(p > 0.0 && p <= 1.0)) throw ParameterError("variance_proxy: p must lie in (0,1]");
  if (s < 1) throw ParameterError("variance_proxy: s must be positive");
  VarianceProxy proxy;
  const double sd = static_cast<double>(s);
  proxy.q_squared = p * p + p * (1.0 - p) / sd;
  // p >= 1/s, compared as p s >= 1 to avoid a rounding 1/s.
  if (p * sd >= 1.0) {
    proxy.v_squared = 2.0 * p * p;
    proxy.simplified = true;
  } else {
    proxy.v_squared = proxy.q_squared;
  }
  return proxy;
}

}  // namespace ssjl::bounds
