#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ssjl/error.hpp"
#include "ssjl/sampler.hpp"

namespace ssjl {

namespace detail {

inline void check_input(const SSCMatrix& A, std::span<const double> x) {
  if (x.size() != A.cols())
    throw ShapeError("vector has dimension " + std::to_string(x.size()) + ", matrix expects " +
                     std::to_string(A.cols()));
  for (std::size_t j = 0; j < x.size(); ++j)
    if (!std::isfinite(x[j])) throw DataError("non-finite entry at index " + std::to_string(j));
}

inline void check_unit(std::span<const double> x) {
  long double norm2 = 0;
  for (double xj : x) norm2 += static_cast<long double>(xj) * xj;
  const double norm = static_cast<double>(std::sqrt(norm2));
  if (std::abs(norm - 1.0) > 1e-9)
    throw NormalizationError("expected a unit vector, norm is " + std::to_string(norm));
}

/// Column-wise scatter of A x into extended-precision accumulators.
inline void apply_accumulate(const SSCMatrix& A, std::span<const double> x,
                             std::vector<long double>& acc) {
  acc.assign(A.rows(), 0.0L);
  const std::uint64_t s = A.nnz_per_col();
  const auto supports = A.raw_supports();
  const auto signs = A.raw_signs();
  for (std::uint64_t j = 0; j < A.cols(); ++j) {
    if (x[j] == 0.0) continue;
    const long double v = signs[j] > 0 ? x[j] : -x[j];
    const std::uint32_t* col = supports.data() + j * s;
    for (std::uint64_t k = 0; k < s; ++k) acc[col[k]] += v;
  }
}

}  // namespace detail

/// y = A x.
inline std::vector<double> apply(const SSCMatrix& A, std::span<const double> x) {
  detail::check_input(A, x);
  std::vector<long double> acc;
  detail::apply_accumulate(A, x, acc);
  const long double scale = 1.0L / std::sqrt(static_cast<long double>(A.nnz_per_col()));
  std::vector<double> y(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) y[i] = static_cast<double>(acc[i] * scale);
  return y;
}

/// ||A x||^2 - 1 for a unit vector x.
inline double distortion_energy(const SSCMatrix& A, std::span<const double> x) {
  detail::check_input(A, x);
  detail::check_unit(x);
  std::vector<long double> acc;
  detail::apply_accumulate(A, x, acc);
  long double sum = 0;
  for (long double a : acc) sum += a * a;
  return static_cast<double>(sum / static_cast<long double>(A.nnz_per_col()) - 1.0L);
}

/// Normalized support overlap |S_j intersect S_j'| / s.
inline double gram_overlap(const SSCMatrix& A, std::uint64_t j, std::uint64_t jp) {
  const auto a = A.support(j);
  const auto b = A.support(jp);
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(A.nnz_per_col());
}

/// Literal off-diagonal quadratic form sum_{j != j'} Q_{jj'} s_j s_j' x_j x_j'.
/// O(m^2 s); reference implementation for distortion_energy.
inline double quadratic_form_direct(const SSCMatrix& A, std::span<const double> x) {
  detail::check_input(A, x);
  detail::check_unit(x);
  long double sum = 0;
  const std::uint64_t m = A.cols();
  for (std::uint64_t j = 0; j < m; ++j) {
    for (std::uint64_t jp = 0; jp < m; ++jp) {
      if (j == jp) continue;
      const double q = gram_overlap(A, j, jp);
      if (q == 0.0) continue;
      sum += static_cast<long double>(q) * A.sign(j) * A.sign(jp) * x[j] * x[jp];
    }
  }
  return static_cast<double>(sum);
}

struct VectorBatch {
  std::size_t m = 0;
  std::vector<std::vector<double>> vectors;
  /// Empty, or one label per vector.
  std::vector<std::string> labels;

  std::size_t size() const noexcept { return vectors.size(); }
  bool has_labels() const noexcept { return !labels.empty(); }
};

struct ParseOptions {
  char delimiter = ',';
  /// First field of every row is an identifier, not a coordinate.
  bool leading_label = false;
};

/// One vector per line. Blank lines are skipped; ragged rows, unparsable or
/// non-finite fields raise InputError carrying the line number.
inline VectorBatch parse_vector_batch(std::istream& in, const ParseOptions& options = {}) {
  VectorBatch batch;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(options.delimiter, start);
      fields.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }

    std::size_t first = 0;
    if (options.leading_label) {
      batch.labels.push_back(fields.front());
      first = 1;
    }
    std::vector<double> values;
    values.reserve(fields.size() - first);
    for (std::size_t k = first; k < fields.size(); ++k) {
      const std::string& field = fields[k];
      const char* begin = field.c_str();
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == begin || *end != '\0')
        throw InputError("cannot parse field " + std::to_string(k + 1) + " '" + field + "'", line_no);
      if (!std::isfinite(value))
        throw InputError("non-finite value in field " + std::to_string(k + 1), line_no);
      values.push_back(value);
    }
    if (values.empty()) throw InputError("row has no coordinates", line_no);
    if (batch.vectors.empty()) {
      batch.m = values.size();
    } else if (values.size() != batch.m) {
      throw InputError("ragged row: expected " + std::to_string(batch.m) + " values, found " +
                           std::to_string(values.size()),
                       line_no);
    }
    batch.vectors.push_back(std::move(values));
  }
  if (batch.vectors.empty()) throw InputError("input contains no vectors");
  return batch;
}

/// Writes the batch in the same delimited layout, values at round-trip precision.
inline void write_vector_batch(std::ostream& out, const VectorBatch& batch, char delimiter = ',') {
  char buffer[32];
  for (std::size_t r = 0; r < batch.vectors.size(); ++r) {
    if (batch.has_labels()) out << batch.labels[r] << delimiter;
    const auto& v = batch.vectors[r];
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k) out << delimiter;
      std::snprintf(buffer, sizeof(buffer), "%.17g", v[k]);
      out << buffer;
    }
    out << '\n';
  }
}

inline VectorBatch embed_batch(const SSCMatrix& A, const VectorBatch& batch) {
  VectorBatch out;
  out.m = A.rows();
  out.labels = batch.labels;
  out.vectors.reserve(batch.size());
  for (const auto& x : batch.vectors) out.vectors.push_back(ssjl::apply(A, x));
  return out;
}

struct PairwiseDistortion {
  std::size_t pairs_evaluated = 0;
  /// Pairs with x == x', for which the ratio is undefined.
  std::size_t pairs_skipped = 0;
  double min_ratio = std::numeric_limits<double>::quiet_NaN();
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
  /// max |ratio - 1| over evaluated pairs.
  double max_abs_deviation = std::numeric_limits<double>::quiet_NaN();
  /// `bins` equal-width bins spanning [min_ratio, max_ratio].
  std::vector<std::size_t> histogram;
  std::vector<double> bin_edges;
};

/// ||A(x - x')|| / ||x - x'|| over all unordered pairs of the batch.
inline PairwiseDistortion pairwise_distortion(const SSCMatrix& A, const VectorBatch& batch,
                                              std::size_t bins = 20) {
  if (batch.size() == 0) throw ParameterError("pairwise_distortion: empty batch");
  if (bins == 0) throw ParameterError("pairwise_distortion: bins must be positive");
  PairwiseDistortion result;
  std::vector<double> ratios;
  if (batch.m != A.cols())
    throw ShapeError("batch dimension " + std::to_string(batch.m) + " does not match matrix columns " +
                     std::to_string(A.cols()));
  std::vector<double> diff(batch.m);
  std::vector<long double> acc;
  for (std::size_t a = 0; a < batch.size(); ++a) {
    for (std::size_t b = a + 1; b < batch.size(); ++b) {
      long double norm2 = 0;
      for (std::size_t k = 0; k < batch.m; ++k) {
        diff[k] = batch.vectors[a][k] - batch.vectors[b][k];
        norm2 += static_cast<long double>(diff[k]) * diff[k];
      }
      if (norm2 == 0) {
        ++result.pairs_skipped;
        continue;
      }
      detail::apply_accumulate(A, diff, acc);
      long double image2 = 0;
      for (long double a : acc) image2 += a * a;
      image2 /= static_cast<long double>(A.nnz_per_col());
      ratios.push_back(static_cast<double>(std::sqrt(image2 / norm2)));
    }
  }
  result.pairs_evaluated = ratios.size();
  result.histogram.assign(bins, 0);
  if (ratios.empty()) return result;

  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  result.min_ratio = *lo;
  result.max_ratio = *hi;
  result.max_abs_deviation = std::max(std::abs(*lo - 1.0), std::abs(*hi - 1.0));
  const double width = (result.max_ratio - result.min_ratio) / static_cast<double>(bins);
  for (std::size_t k = 0; k <= bins; ++k)
    result.bin_edges.push_back(result.min_ratio + width * static_cast<double>(k));
  for (double r : ratios) {
    std::size_t bin = width > 0 ? static_cast<std::size_t>((r - result.min_ratio) / width) : 0;
    result.histogram[std::min(bin, bins - 1)]++;
  }
  return result;
}

}  // namespace ssjl
