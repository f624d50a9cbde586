#pragma once

// Portable, seekable random streams.
//
// Every random draw in the library comes from a Stream identified by the key
// (master_seed, stream_id, lane, domain):
//
//   state[0] = mix64(master_seed ^ 0x243f6a8885a308d3)
//   state[1] = mix64(stream_id   ^ 0x13198a2e03707344)
//   state[2] = mix64(lane        ^ 0xa4093822299f31d0)
//   state[3] = mix64(domain      ^ 0x082efa98ec4e6c89)
//
// followed by kMixRounds rounds of
//
//   state[i] ^= mix64(state[i+1] ^ rotl(state[i+2], 21) ^ rotl(state[i+3], 42)
//                     ^ (4 * round + i) * 0x9e3779b97f4a7c15)      (indices mod 4)
//
// for i = 0..3, so every word depends on the whole key. mix64 is the
// splitmix64 finalizer, a bijection, and each mixing step only XORs a word
// with a function of the others, so distinct keys always give distinct states. stream_id is the trial index
// and lane the column index, which makes every draw addressable without
// replaying earlier ones.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ssjl/error.hpp"

namespace ssjl {

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// What a stream is used for. Part of the key so that, e.g., the test vector
/// of trial k never shares draws with column k of the matrix of that trial.
enum class StreamDomain : std::uint64_t {
  matrix_column = 1,
  test_vector = 2,
  dense_baseline = 3,
  support_only = 4,
};

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** with a keyed constructor.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t master_seed, std::uint64_t stream_id, std::uint64_t lane,
         StreamDomain domain) noexcept {
    state_[0] = mix64(master_seed ^ 0x243f6a8885a308d3ULL);
    state_[1] = mix64(stream_id ^ 0x13198a2e03707344ULL);
    state_[2] = mix64(lane ^ 0xa4093822299f31d0ULL);
    state_[3] = mix64(static_cast<std::uint64_t>(domain) ^ 0x082efa98ec4e6c89ULL);
    for (std::uint64_t round = 0; round < kMixRounds; ++round)
      for (std::uint64_t i = 0; i < 4; ++i)
        state_[i] ^= mix64(state_[(i + 1) & 3] ^ rotl(state_[(i + 2) & 3], 21) ^
                           rotl(state_[(i + 3) & 3], 42) ^ (4 * round + i) * 0x9e3779b97f4a7c15ULL);
    // The all-zero state is a fixed point of xoshiro.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 1;
  }

  static constexpr std::uint64_t kMixRounds = 2;

  Stream(const SeedSpec& seed, std::uint64_t lane, StreamDomain domain) noexcept
      : Stream(seed.master_seed, seed.stream_id, lane, domain) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept { return next(); }

  std::uint64_t next() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection;
  /// exact for every bound > 0.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    unsigned __int128 product = static_cast<unsigned __int128>(next()) * bound;
    auto low = static_cast<std::uint64_t>(product);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        product = static_cast<unsigned __int128>(next()) * bound;
        low = static_cast<std::uint64_t>(product);
      }
    }
    return static_cast<std::uint64_t>(product >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Rademacher draw, +1 or -1 with equal probability.
  int sign() noexcept { return (next() >> 63) ? 1 : -1; }

  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, r2;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Uniformly distributed unit vector in R^m (normalized Gaussian).
inline std::vector<double> random_unit_vector(std::size_t m, Stream& rng) {
  if (m == 0) throw ParameterError("random_unit_vector: dimension must be positive");
  std::vector<double> x(m);
  long double norm2 = 0;
  do {
    norm2 = 0;
    for (auto& xi : x) {
      xi = rng.normal();
      norm2 += static_cast<long double>(xi) * xi;
    }
  } while (norm2 == 0);
  const double inv = static_cast<double>(1.0L / std::sqrt(norm2));
  for (auto& xi : x) xi *= inv;
  return x;
}

}  // namespace ssjl
