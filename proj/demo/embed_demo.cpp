// Embeds a few random points and prints how well pairwise distances survive.

#include <cstdio>

#include "ssjl/ssjl.hpp"

int main() {
  const auto params = ssjl::compute_parameters(0.5, 0.1);
  std::printf("eps=%.2f delta=%.2f -> d=%llu s=%llu (feasible: %s)\n", params.epsilon, params.delta,
              static_cast<unsigned long long>(params.d), static_cast<unsigned long long>(params.s),
              params.feasible() ? "yes" : "no");

  constexpr std::uint64_t m = 300;
  ssjl::VectorBatch batch;
  batch.m = m;
  for (std::uint64_t k = 0; k < 10; ++k) {
    ssjl::Stream rng(7, k, 0, ssjl::StreamDomain::test_vector);
    batch.vectors.push_back(ssjl::random_unit_vector(m, rng));
  }

  const auto A = ssjl::sample_matrix(params.d, m, params.s, {7, 0});
  const auto stats = ssjl::pairwise_distortion(A, batch);
  std::printf("%zu pairs: distance ratio in [%.4f, %.4f]\n", stats.pairs_evaluated, stats.min_ratio,
              stats.max_ratio);
  return 0;
}
