#pragma once

// Matrix parameters for a target distortion and failure probability.
//
//   d = ceil(512 ln^2(2/delta) / eps^2)
//   p = eps / (16 sqrt(2) ln(2/delta))
//   s = ceil(p d)              (clamped to d)
//
// The bounds downstream use the realized sparsity s/d rather than p.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ssjl/error.hpp"

namespace ssjl {

struct JLParams {
  double epsilon = 0.0;
  double delta = 0.0;
  std::uint64_t d = 0;
  std::uint64_t s = 0;
  double p_nominal = 0.0;
  /// True when s had to be clamped down to d.
  bool clamped = false;

  double p_actual() const noexcept {
    return d == 0 ? 0.0 : static_cast<double>(s) / static_cast<double>(d);
  }
  /// s^2 >= d, i.e. s/d >= 1/s, evaluated on the integers.
  bool feasible() const noexcept { return s * s >= d; }
};

/// Unrounded output dimension 512 ln^2(2/delta) / eps^2.
inline double dimension_formula(double epsilon, double delta) {
  const double log_term = std::log(2.0 / delta);
  return 512.0 * log_term * log_term / (epsilon * epsilon);
}

inline double sparsity_formula(double epsilon, double delta) {
  return epsilon / (16.0 * std::sqrt(2.0) * std::log(2.0 / delta));
}

inline JLParams compute_parameters(double epsilon, double delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ParameterError("epsilon must lie in (0,1), got " + std::to_string(epsilon));
  if (!(delta > 0.0 && delta < 1.0))
    throw ParameterError("delta must lie in (0,1), got " + std::to_string(delta));

  const double d_real = std::ceil(dimension_formula(epsilon, delta));
  if (!(d_real < static_cast<double>(std::numeric_limits<std::uint32_t>::max())))
    throw ParameterError("output dimension " + std::to_string(d_real) +
                         " exceeds the supported range");

  JLParams params;
  params.epsilon = epsilon;
  params.delta = delta;
  params.d = static_cast<std::uint64_t>(d_real);
  params.p_nominal = sparsity_formula(epsilon, delta);
  params.s = static_cast<std::uint64_t>(std::ceil(params.p_nominal * d_real));
  if (params.s < 1) params.s = 1;
  if (params.s > params.d) {
    params.s = params.d;
    params.clamped = true;
  }
  return params;
}

/// Parameters with explicit (d, s); epsilon, delta and p_nominal are unset.
inline JLParams explicit_parameters(std::uint64_t d, std::uint64_t s) {
  if (d < 1) throw ParameterError("d must be positive");
  if (s < 1 || s > d)
    throw ParameterError("s must lie in [1, d], got s=" + std::to_string(s) +
                         " d=" + std::to_string(d));
  JLParams params;
  params.d = d;
  params.s = s;
  params.p_nominal = static_cast<double>(s) / static_cast<double>(d);
  return params;
}

/// Lists every violated invariant. An empty list means the parameters are valid
/// and feasible. epsilon/delta are only checked when set (nonzero).
inline std::vector<std::string> validate_params(const JLParams& params) {
  std::vector<std::string> violations;
  const bool derived = params.epsilon != 0.0 || params.delta != 0.0;
  if (derived) {
    if (!(params.epsilon > 0.0 && params.epsilon < 1.0))
      violations.push_back("epsilon outside (0,1)");
    if (!(params.delta > 0.0 && params.delta < 1.0))
      violations.push_back("delta outside (0,1)");
  }
  if (params.d < 1) violations.push_back("d < 1");
  if (params.s < 1) violations.push_back("s < 1");
  if (params.s > params.d) violations.push_back("s > d");
  if (params.d >= 1 && params.s >= 1 && !params.feasible()) {
    violations.push_back("s^2 < d (" + std::to_string(params.s * params.s) + " < " +
                         std::to_string(params.d) + "): sparsity below 1/s");
  }
  return violations;
}

}  // namespace ssjl
