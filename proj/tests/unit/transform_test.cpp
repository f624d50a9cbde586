#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "ssjl/params.hpp"
#include "ssjl/transform.hpp"

using namespace ssjl;

namespace {

std::vector<double> unit_random(std::uint64_t m, std::uint64_t key) {
  Stream rng(key, 0, 0, StreamDomain::test_vector);
  return random_unit_vector(m, rng);
}

std::vector<double> basis(std::uint64_t m, std::uint64_t j) {
  std::vector<double> x(m, 0.0);
  x[j] = 1.0;
  return x;
}

// Dense row-major materialization built straight from supports and signs.
std::vector<double> dense_product(const SSCMatrix& A, const std::vector<double>& x) {
  std::vector<std::vector<double>> dense(A.rows(), std::vector<double>(A.cols(), 0.0));
  const double mag = 1.0 / std::sqrt(static_cast<double>(A.nnz_per_col()));
  for (std::uint64_t j = 0; j < A.cols(); ++j)
    for (auto i : A.support(j)) dense[i][j] = A.sign(j) * mag;
  std::vector<double> y(A.rows(), 0.0);
  for (std::uint64_t i = 0; i < A.rows(); ++i)
    for (std::uint64_t j = 0; j < A.cols(); ++j) y[i] += dense[i][j] * x[j];
  return y;
}

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST(Apply, BasisVectorHitsExactlySEntries) {
  const auto A = sample_matrix(40, 12, 6, {1, 0});
  const double mag = 1.0 / std::sqrt(6.0);
  for (std::uint64_t j = 0; j < 12; ++j) {
    const auto y = ssjl::apply(A, basis(12, j));
    std::size_t nnz = 0;
    double n2 = 0;
    for (double v : y) {
      if (v != 0.0) {
        ++nnz;
        EXPECT_DOUBLE_EQ(std::abs(v), mag);
      }
      n2 += v * v;
    }
    EXPECT_EQ(nnz, 6u);
    EXPECT_NEAR(n2, 1.0, 1e-15);
    EXPECT_EQ(distortion_energy(A, basis(12, j)), 0.0);
  }
}

TEST(Apply, ZeroMapsToZero) {
  const auto A = sample_matrix(10, 5, 3, {2, 0});
  for (double v : ssjl::apply(A, std::vector<double>(5, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(Apply, MatchesDenseOracle) {
  for (std::uint64_t t = 0; t < 50; ++t) {
    const std::uint64_t d = 2 + (t * 7) % 63, m = 1 + (t * 5) % 32, s = 1 + t % d;
    const auto A = sample_matrix(d, m, s, {3, t});
    const auto x = unit_random(m, 100 + t);
    const auto y = ssjl::apply(A, x);
    const auto ref = dense_product(A, x);
    double norm = 0;
    for (double r : ref) norm = std::max(norm, std::abs(r));
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_LE(std::abs(y[i] - ref[i]), 1e-12 * std::max(norm, 1e-300));
  }
}

TEST(Apply, IsLinear) {
  const auto A = sample_matrix(64, 32, 8, {4, 0});
  const auto x = unit_random(32, 1), y = unit_random(32, 2);
  const double alpha = 1.7, beta = -0.45;
  std::vector<double> combo(32);
  for (int k = 0; k < 32; ++k) combo[k] = alpha * x[k] + beta * y[k];
  const auto lhs = ssjl::apply(A, combo);
  const auto ax = ssjl::apply(A, x), ay = ssjl::apply(A, y);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double rhs = alpha * ax[i] + beta * ay[i];
    EXPECT_LE(std::abs(lhs[i] - rhs), 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Apply, Errors) {
  const auto A = sample_matrix(10, 4, 2, {5, 0});
  EXPECT_THROW(ssjl::apply(A, std::vector<double>(3, 0.0)), ShapeError);
  std::vector<double> bad(4, 0.0);
  bad[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(ssjl::apply(A, bad), DataError);
  bad[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(ssjl::apply(A, bad), DataError);
}

TEST(DistortionEnergy, RejectsNonUnit) {
  const auto A = sample_matrix(10, 4, 2, {5, 0});
  EXPECT_THROW(distortion_energy(A, std::vector<double>(4, 1.0)), NormalizationError);
  EXPECT_THROW(quadratic_form_direct(A, std::vector<double>(4, 0.0)), NormalizationError);
  std::vector<double> almost = basis(4, 1);
  almost[1] = 1.0 + 5e-10;
  EXPECT_NO_THROW(distortion_energy(A, almost));
}

TEST(DistortionEnergy, DenseColumnsClosedForm) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const std::uint64_t d = 3 + t % 5, m = 2 + t % 9;
    const auto A = sample_matrix(d, m, d, {6, t});
    const auto x = unit_random(m, 200 + t);
    double signed_sum = 0;
    for (std::uint64_t j = 0; j < m; ++j) signed_sum += A.sign(j) * x[j];
    EXPECT_NEAR(distortion_energy(A, x), signed_sum * signed_sum - 1.0, 1e-12);
  }
}

TEST(DistortionEnergy, SignFlipInvariant) {
  const auto A = sample_matrix(50, 20, 5, {7, 0});
  auto x = unit_random(20, 3);
  const double e = distortion_energy(A, x);
  for (auto& v : x) v = -v;
  EXPECT_EQ(distortion_energy(A, x), e);
}

// The quadratic-form reduction, property-tested over random instances.
TEST(ReductionIdentity, EnergyEqualsOffDiagonalForm) {
  Stream shapes(8, 0, 0, StreamDomain::support_only);
  for (std::uint64_t t = 0; t < 200; ++t) {
    const std::uint64_t d = 1 + shapes.uniform_below(64);
    const std::uint64_t m = 1 + shapes.uniform_below(32);
    const std::uint64_t s = 1 + shapes.uniform_below(d);
    const auto A = sample_matrix(d, m, s, {9, t});
    const auto x = unit_random(m, 300 + t);
    EXPECT_LE(rel_gap(distortion_energy(A, x), quadratic_form_direct(A, x)), 1e-9)
        << "d=" << d << " m=" << m << " s=" << s;
  }
}

TEST(QuadraticFormDirect, TrivialCases) {
  const auto A = sample_matrix(8, 5, 3, {10, 0});
  EXPECT_EQ(quadratic_form_direct(A, basis(5, 2)), 0.0);
  const auto B = sample_matrix(8, 1, 3, {10, 1});
  EXPECT_EQ(quadratic_form_direct(B, std::vector<double>{-1.0}), 0.0);
  EXPECT_EQ(distortion_energy(B, std::vector<double>{-1.0}), 0.0);
}

TEST(GramOverlap, DiagonalSymmetryRange) {
  const auto A = sample_matrix(30, 15, 6, {11, 0});
  for (std::uint64_t j = 0; j < 15; ++j) {
    EXPECT_EQ(gram_overlap(A, j, j), 1.0);
    for (std::uint64_t k = 0; k < 15; ++k) {
      const double q = gram_overlap(A, j, k);
      EXPECT_EQ(q, gram_overlap(A, k, j));
      EXPECT_GE(q, 0.0);
      EXPECT_LE(q, 1.0);
    }
  }
  EXPECT_THROW(gram_overlap(A, 0, 15), ShapeError);
}

TEST(GramOverlap, DisjointAndPartial) {
  const SSCMatrix A(6, 3, 2, {0, 1, 2, 3, 1, 5}, {1, -1, 1});
  EXPECT_EQ(gram_overlap(A, 0, 1), 0.0);
  EXPECT_EQ(gram_overlap(A, 0, 2), 0.5);
}

// Enumerating all 36 ordered pairs of 2-subsets of {0,1,2,3} gives overlap
// 0, 1, 2 with probability 1/6, 4/6, 1/6, so E Q = 1/2 and E Q^2 = 1/3.
TEST(GramOverlap, HypergeometricLawForFourChooseTwo) {
  std::vector<std::vector<std::uint32_t>> subsets;
  for (std::uint32_t a = 0; a < 4; ++a)
    for (std::uint32_t b = a + 1; b < 4; ++b) subsets.push_back({a, b});
  double mean = 0, mean2 = 0;
  for (const auto& u : subsets)
    for (const auto& w : subsets) {
      std::vector<std::uint32_t> sup = u;
      sup.insert(sup.end(), w.begin(), w.end());
      const SSCMatrix A(4, 2, 2, sup, {1, 1});
      const double q = gram_overlap(A, 0, 1);
      mean += q / 36.0;
      mean2 += q * q / 36.0;
    }
  EXPECT_NEAR(mean, 0.5, 1e-15);
  EXPECT_NEAR(mean2, 1.0 / 3.0, 1e-15);

  constexpr std::uint64_t n = 100000;
  double mc = 0, mc2 = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    const double q = gram_overlap(sample_matrix(4, 2, 2, {12, t}), 0, 1);
    mc += q;
    mc2 += q * q;
  }
  mc /= n;
  mc2 /= n;
  // Var Q = 1/12, Var Q^2 = E Q^4 - (E Q^2)^2 = (4/6 * 1/16 + 1/6) - 1/9.
  EXPECT_NEAR(mc, 0.5, 3 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(mc2, 1.0 / 3.0, 3 * std::sqrt((4.0 / 96 + 1.0 / 6 - 1.0 / 9) / n));
}

TEST(ParseVectorBatch, PlainAndLabelled) {
  std::istringstream plain("1,2,3\n\n4,5,6\r\n");
  const auto a = parse_vector_batch(plain);
  EXPECT_EQ(a.m, 3u);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.vectors[1], (std::vector<double>{4, 5, 6}));
  EXPECT_FALSE(a.has_labels());

  std::istringstream labelled("p\t0.5\t-1e-3\nq\t2\t3\n");
  const auto b = parse_vector_batch(labelled, {'\t', true});
  EXPECT_EQ(b.labels, (std::vector<std::string>{"p", "q"}));
  EXPECT_EQ(b.vectors[0], (std::vector<double>{0.5, -1e-3}));
}

TEST(ParseVectorBatch, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      parse_vector_batch(in);
    } catch (const InputError& e) {
      return e.line();
    }
    return 999;
  };
  EXPECT_EQ(line_of("1,2\n3,4\n5\n"), 3u);
  EXPECT_EQ(line_of("1,2\n\nnan,4\n"), 3u);
  EXPECT_EQ(line_of("1,inf\n"), 1u);
  EXPECT_EQ(line_of("1,x\n"), 1u);
  EXPECT_EQ(line_of("1,,2\n"), 1u);
  EXPECT_EQ(line_of(""), 0u);
  EXPECT_EQ(line_of("\n \n"), 0u);
}

TEST(WriteVectorBatch, ParsesBackExactly) {
  VectorBatch batch;
  batch.m = 3;
  Stream rng(13, 0, 0, StreamDomain::test_vector);
  for (int k = 0; k < 10; ++k) batch.vectors.push_back({rng.normal(), rng.normal() * 1e-300, rng.normal() * 1e300});
  for (int k = 0; k < 10; ++k) batch.labels.push_back("row" + std::to_string(k));
  std::stringstream buffer;
  write_vector_batch(buffer, batch, ';');
  const auto back = parse_vector_batch(buffer, {';', true});
  EXPECT_EQ(back.vectors, batch.vectors);
  EXPECT_EQ(back.labels, batch.labels);
}

TEST(PairwiseDistortion, IdenticalVectorsAreSkipped) {
  const auto A = sample_matrix(20, 4, 3, {14, 0});
  VectorBatch batch;
  batch.m = 4;
  batch.vectors.assign(5, std::vector<double>{1, 2, 3, 4});
  const auto r = pairwise_distortion(A, batch);
  EXPECT_EQ(r.pairs_skipped, 10u);
  EXPECT_EQ(r.pairs_evaluated, 0u);
  EXPECT_TRUE(std::isnan(r.min_ratio));
}

TEST(PairwiseDistortion, ZeroAndBasis) {
  const auto A = sample_matrix(20, 4, 3, {14, 1});
  VectorBatch batch;
  batch.m = 4;
  batch.vectors = {std::vector<double>(4, 0.0), basis(4, 2)};
  const auto r = pairwise_distortion(A, batch);
  EXPECT_EQ(r.pairs_evaluated, 1u);
  EXPECT_EQ(r.min_ratio, 1.0);
  EXPECT_EQ(r.max_ratio, 1.0);
  EXPECT_EQ(r.histogram[0], 1u);
}

TEST(PairwiseDistortion, ReferenceParametersPreserveDistances) {
  // Per-pair failure Pr[|E| > 0.5] is at most 0.1 by construction and is
  // measured far lower; 190 pairs at that rate make any failure unlikely.
  const auto params = compute_parameters(0.5, 0.1);
  constexpr std::uint64_t m = 100;
  VectorBatch batch;
  batch.m = m;
  for (std::uint64_t k = 0; k < 20; ++k) batch.vectors.push_back(unit_random(m, 400 + k));
  const auto A = sample_matrix(params.d, m, params.s, {15, 0});
  const auto r = pairwise_distortion(A, batch, 10);
  EXPECT_EQ(r.pairs_evaluated, 190u);
  EXPECT_LE(r.max_abs_deviation, 0.5);
  std::size_t total = 0;
  for (auto h : r.histogram) total += h;
  EXPECT_EQ(total, 190u);
  EXPECT_EQ(r.bin_edges.size(), 11u);
}

TEST(PairwiseDistortion, Errors) {
  const auto A = sample_matrix(20, 4, 3, {14, 2});
  VectorBatch empty;
  empty.m = 4;
  EXPECT_THROW(pairwise_distortion(A, empty), ParameterError);
  VectorBatch wrong;
  wrong.m = 3;
  wrong.vectors = {{1, 2, 3}};
  EXPECT_THROW(pairwise_distortion(A, wrong), ShapeError);
}
