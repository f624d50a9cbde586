#pragma once

// Sparse sign-consistent matrices.
//
// A d x m matrix where column j has exactly s nonzero rows (a uniformly random
// s-subset of [0, d)) and every nonzero entry equals sign_j / sqrt(s). Only the
// supports and the signs are stored; values are implied.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ssjl/error.hpp"
#include "ssjl/rng.hpp"

namespace ssjl {

namespace detail {

/// Floyd's subset sampling into `out` (unsorted), using `seen` as a
/// d-sized membership scratch which is returned all-false.
inline void floyd_subset(std::uint32_t d, std::uint32_t s, Stream& rng,
                         std::vector<char>& seen, std::uint32_t* out) {
  std::uint32_t count = 0;
  for (std::uint32_t j = d - s; j < d; ++j) {
    auto t = static_cast<std::uint32_t>(rng.uniform_below(std::uint64_t{j} + 1));
    if (seen[t]) t = j;
    seen[t] = 1;
    out[count++] = t;
  }
  for (std::uint32_t k = 0; k < s; ++k) seen[out[k]] = 0;
}

inline void check_support_args(std::uint64_t d, std::uint64_t s) {
  if (s < 1 || s > d)
    throw ParameterError("support size must satisfy 1 <= s <= d, got s=" + std::to_string(s) +
                         " d=" + std::to_string(d));
  if (d > 0xffffffffULL) throw ParameterError("d exceeds 32-bit row index range");
}

}  // namespace detail

/// Uniform s-subset of [0, d), sorted ascending.
inline std::vector<std::uint32_t> sample_support(std::uint64_t d, std::uint64_t s, Stream& rng) {
  detail::check_support_args(d, s);
  std::vector<char> seen(d, 0);
  std::vector<std::uint32_t> out(s);
  detail::floyd_subset(static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(s), rng, seen,
                       out.data());
  std::sort(out.begin(), out.end());
  return out;
}

class SSCMatrix {
 public:
  SSCMatrix() = default;

  /// Builds a matrix from its parts, checking every structural invariant.
  /// `supports` is column-major: column j occupies [j*s, (j+1)*s).
  SSCMatrix(std::uint64_t d, std::uint64_t m, std::uint64_t s, std::vector<std::uint32_t> supports,
            std::vector<std::int8_t> signs, SeedSpec seed = {})
      : d_(d), m_(m), s_(s), seed_(seed), supports_(std::move(supports)), signs_(std::move(signs)) {
    if (const auto problem = structural_violation(); !problem.empty())
      throw ShapeError("invalid sparse sign-consistent matrix: " + problem);
  }

  std::uint64_t rows() const noexcept { return d_; }
  std::uint64_t cols() const noexcept { return m_; }
  std::uint64_t nnz_per_col() const noexcept { return s_; }
  double scale() const noexcept { return 1.0 / std::sqrt(static_cast<double>(s_)); }
  double sparsity() const noexcept { return static_cast<double>(s_) / static_cast<double>(d_); }
  const SeedSpec& seed() const noexcept { return seed_; }

  std::span<const std::uint32_t> support(std::uint64_t j) const {
    if (j >= m_) throw ShapeError("column index " + std::to_string(j) + " out of range");
    return {supports_.data() + j * s_, static_cast<std::size_t>(s_)};
  }
  int sign(std::uint64_t j) const {
    if (j >= m_) throw ShapeError("column index " + std::to_string(j) + " out of range");
    return signs_[j];
  }

  /// Implied entry A(i, j).
  double entry(std::uint64_t i, std::uint64_t j) const {
    if (i >= d_) throw ShapeError("row index " + std::to_string(i) + " out of range");
    const auto col = support(j);
    return std::binary_search(col.begin(), col.end(), static_cast<std::uint32_t>(i))
               ? signs_[j] * scale()
               : 0.0;
  }

  std::span<const std::uint32_t> raw_supports() const noexcept { return supports_; }
  std::span<const std::int8_t> raw_signs() const noexcept { return signs_; }

  /// Empty string when every invariant holds, otherwise the first violation.
  std::string structural_violation() const {
    if (d_ < 1 || m_ < 1) return "dimensions must be positive";
    if (s_ < 1 || s_ > d_) return "s must lie in [1, d]";
    if (supports_.size() != m_ * s_) return "support array has wrong length";
    if (signs_.size() != m_) return "sign array has wrong length";
    for (std::uint64_t j = 0; j < m_; ++j) {
      if (signs_[j] != 1 && signs_[j] != -1) return "column " + std::to_string(j) + " sign not +-1";
      const std::uint32_t* col = supports_.data() + j * s_;
      for (std::uint64_t k = 0; k < s_; ++k) {
        if (col[k] >= d_) return "column " + std::to_string(j) + " row index out of range";
        if (k > 0 && col[k] <= col[k - 1])
          return "column " + std::to_string(j) + " support not strictly increasing";
      }
    }
    return {};
  }

  friend bool operator==(const SSCMatrix&, const SSCMatrix&) = default;

 private:
  std::uint64_t d_ = 0;
  std::uint64_t m_ = 0;
  std::uint64_t s_ = 0;
  SeedSpec seed_{};
  std::vector<std::uint32_t> supports_;
  std::vector<std::int8_t> signs_;
};

/// Samples column j from the stream keyed by (seed, j): support first, then sign.
/// Columns are independent of each other and of sampling order.
inline SSCMatrix sample_matrix(std::uint64_t d, std::uint64_t m, std::uint64_t s,
                               const SeedSpec& seed) {
  detail::check_support_args(d, s);
  if (m < 1) throw ParameterError("m must be positive");
  std::vector<std::uint32_t> supports(m * s);
  std::vector<std::int8_t> signs(m);
  std::vector<char> seen(d, 0);
  for (std::uint64_t j = 0; j < m; ++j) {
    Stream rng(seed, j, StreamDomain::matrix_column);
    std::uint32_t* col = supports.data() + j * s;
    detail::floyd_subset(static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(s), rng, seen,
                         col);
    std::sort(col, col + s);
    signs[j] = static_cast<std::int8_t>(rng.sign());
  }
  return SSCMatrix(d, m, s, std::move(supports), std::move(signs), seed);
}

// Binary layout, all integers little-endian:
//   bytes 0..7   magic "SSJLMAT\0"
//   u32          format version (1)
//   u64 x 5      d, m, s, master_seed, stream_id
//   u32 x m*s    supports, column-major
//   i8  x m      signs
inline constexpr char kMatrixMagic[8] = {'S', 'S', 'J', 'L', 'M', 'A', 'T', '\0'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

namespace detail {

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  char bytes[sizeof(UInt)];
  for (std::size_t k = 0; k < sizeof(UInt); ++k)
    bytes[k] = static_cast<char>((value >> (8 * k)) & 0xff);
  out.write(bytes, sizeof(UInt));
}

template <typename UInt>
UInt get_le(std::istream& in) {
  unsigned char bytes[sizeof(UInt)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(UInt)))
    throw InputError("matrix file truncated");
  UInt value = 0;
  for (std::size_t k = 0; k < sizeof(UInt); ++k) value |= static_cast<UInt>(bytes[k]) << (8 * k);
  return value;
}

}  // namespace detail

inline void write_matrix(std::ostream& out, const SSCMatrix& matrix) {
  out.write(kMatrixMagic, sizeof(kMatrixMagic));
  detail::put_le<std::uint32_t>(out, kMatrixFormatVersion);
  detail::put_le<std::uint64_t>(out, matrix.rows());
  detail::put_le<std::uint64_t>(out, matrix.cols());
  detail::put_le<std::uint64_t>(out, matrix.nnz_per_col());
  detail::put_le<std::uint64_t>(out, matrix.seed().master_seed);
  detail::put_le<std::uint64_t>(out, matrix.seed().stream_id);
  for (auto row : matrix.raw_supports()) detail::put_le<std::uint32_t>(out, row);
  for (auto sign : matrix.raw_signs()) detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(sign));
  if (!out) throw Error("failed writing matrix");
}

inline SSCMatrix read_matrix(std::istream& in) {
  char magic[sizeof(kMatrixMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0)
    throw InputError("not a sparse sign-consistent matrix file");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kMatrixFormatVersion)
    throw InputError("unsupported matrix format version " + std::to_string(version));
  const auto d = detail::get_le<std::uint64_t>(in);
  const auto m = detail::get_le<std::uint64_t>(in);
  const auto s = detail::get_le<std::uint64_t>(in);
  SeedSpec seed;
  seed.master_seed = detail::get_le<std::uint64_t>(in);
  seed.stream_id = detail::get_le<std::uint64_t>(in);
  if (d < 1 || d > 0xffffffffULL || s < 1 || s > d || m < 1 || m > (1ULL << 40) / s)
    throw InputError("matrix header has invalid dimensions");
  std::vector<std::uint32_t> supports(m * s);
  for (auto& row : supports) row = detail::get_le<std::uint32_t>(in);
  std::vector<std::int8_t> signs(m);
  for (auto& sign : signs) sign = static_cast<std::int8_t>(detail::get_le<std::uint8_t>(in));
  try {
    return SSCMatrix(d, m, s, std::move(supports), std::move(signs), seed);
  } catch (const ShapeError& e) {
    throw InputError(e.what());
  }
}

inline void save_matrix(const std::string& path, const SSCMatrix& matrix) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_matrix(out, matrix);
}

inline SSCMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_matrix(in);
}

}  // namespace ssjl
