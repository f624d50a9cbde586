#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "ssjl/sampler.hpp"

using namespace ssjl;

namespace {

// Frequency within k standard errors of p over n Bernoulli draws.
void expect_frequency(std::uint64_t hits, std::uint64_t n, double p, double k = 3.0) {
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
  EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(n), p, k * se);
}

bool has_row(const SSCMatrix& A, std::uint64_t i, std::uint64_t j) {
  const auto col = A.support(j);
  return std::binary_search(col.begin(), col.end(), static_cast<std::uint32_t>(i));
}

}  // namespace

TEST(SampleSupport, FullColumn) {
  Stream rng(1, 0, 0, StreamDomain::support_only);
  for (int k = 0; k < 10; ++k)
    EXPECT_EQ(sample_support(5, 5, rng), (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
}

TEST(SampleSupport, SingletonIsUniform) {
  Stream rng(2, 0, 0, StreamDomain::support_only);
  constexpr std::uint64_t n = 100000;
  std::vector<std::uint64_t> counts(5, 0);
  for (std::uint64_t k = 0; k < n; ++k) {
    const auto support = sample_support(5, 1, rng);
    ASSERT_EQ(support.size(), 1u);
    counts[support[0]]++;
  }
  for (auto c : counts) expect_frequency(c, n, 0.2);
}

// There are C(4,2) = 6 two-subsets of {0,1,2,3}; each must appear w.p. 1/6.
TEST(SampleSupport, TwoSubsetsAreUniform) {
  Stream rng(3, 0, 0, StreamDomain::support_only);
  constexpr std::uint64_t n = 100000;
  std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
  for (std::uint64_t k = 0; k < n; ++k) counts[sample_support(4, 2, rng)]++;
  ASSERT_EQ(counts.size(), 6u);
  for (const auto& [subset, c] : counts) {
    EXPECT_LT(subset[0], subset[1]);
    expect_frequency(c, n, 1.0 / 6.0);
  }
}

TEST(SampleSupport, RejectsBadSizes) {
  Stream rng(4, 0, 0, StreamDomain::support_only);
  EXPECT_THROW(sample_support(5, 6, rng), ParameterError);
  EXPECT_THROW(sample_support(5, 0, rng), ParameterError);
}

TEST(SampleMatrix, DenseColumnsOnlyVaryInSign) {
  const auto A = sample_matrix(4, 3, 4, {11, 0});
  for (std::uint64_t j = 0; j < 3; ++j) {
    const auto col = A.support(j);
    EXPECT_EQ(std::vector<std::uint32_t>(col.begin(), col.end()),
              (std::vector<std::uint32_t>{0, 1, 2, 3}));
  }
}

TEST(SampleMatrix, DeterministicPerSeed) {
  const auto a = sample_matrix(50, 20, 7, {99, 5});
  const auto b = sample_matrix(50, 20, 7, {99, 5});
  EXPECT_EQ(a, b);
  const auto c = sample_matrix(50, 20, 7, {99, 6});
  EXPECT_NE(a, c);
}

// Column j only depends on (seed, j): a wider matrix shares its first columns.
TEST(SampleMatrix, ColumnsAreIndexAddressed) {
  const auto narrow = sample_matrix(30, 3, 4, {5, 1});
  const auto wide = sample_matrix(30, 10, 4, {5, 1});
  for (std::uint64_t j = 0; j < 3; ++j) {
    EXPECT_TRUE(std::equal(narrow.support(j).begin(), narrow.support(j).end(),
                           wide.support(j).begin()));
    EXPECT_EQ(narrow.sign(j), wide.sign(j));
  }
}

TEST(SampleMatrix, StructureHoldsAcrossGrid) {
  std::uint64_t stream = 0;
  for (std::uint64_t d : {1u, 2u, 7u, 64u, 300u})
    for (std::uint64_t s : {1u, 2u, 5u, 64u})
      for (std::uint64_t m : {1u, 9u, 40u}) {
        if (s > d) continue;
        const auto A = sample_matrix(d, m, s, {123, stream++});
        EXPECT_EQ(A.structural_violation(), "");
        const double mag = 1.0 / std::sqrt(static_cast<double>(s));
        for (std::uint64_t j = 0; j < m; ++j) {
          std::uint64_t nnz = 0;
          for (std::uint64_t i = 0; i < d; ++i) {
            const double a = A.entry(i, j);
            if (a != 0.0) {
              ++nnz;
              EXPECT_EQ(a, A.sign(j) * mag);
            }
          }
          EXPECT_EQ(nnz, s);
        }
        EXPECT_DOUBLE_EQ(A.sparsity(), static_cast<double>(s) / static_cast<double>(d));
      }
}

TEST(SampleMatrix, InclusionFrequency) {
  constexpr std::uint64_t n = 10000;
  const std::pair<std::uint64_t, std::uint64_t> cells[] = {{0, 0}, {99, 49}, {50, 25}, {7, 13}};
  std::vector<std::uint64_t> hits(std::size(cells), 0);
  for (std::uint64_t t = 0; t < n; ++t) {
    const auto A = sample_matrix(100, 50, 10, {77, t});
    for (std::size_t k = 0; k < std::size(cells); ++k)
      hits[k] += has_row(A, cells[k].first, cells[k].second);
  }
  for (auto h : hits) expect_frequency(h, n, 0.1);
}

TEST(SampleMatrix, SignMarginalAndCorrelations) {
  constexpr std::uint64_t n = 20000;
  constexpr std::uint64_t d = 10, s = 3;
  std::uint64_t plus = 0, across = 0, within = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    const auto A = sample_matrix(d, 2, s, {31, t});
    plus += A.sign(0) > 0;
    across += has_row(A, 0, 0) && has_row(A, 0, 1);
    within += has_row(A, 0, 0) && has_row(A, 1, 0);
  }
  expect_frequency(plus, n, 0.5);
  const double p = static_cast<double>(s) / d;
  expect_frequency(across, n, p * p);
  const double exact_within = static_cast<double>(s * (s - 1)) / static_cast<double>(d * (d - 1));
  expect_frequency(within, n, exact_within);
  // Negative correlation within a column.
  const double se = std::sqrt(p * p * (1 - p * p) / n);
  EXPECT_LE(static_cast<double>(within) / n, p * p + 3 * se);
}

TEST(SSCMatrixTest, ConstructorRejectsBrokenStructure) {
  EXPECT_THROW(SSCMatrix(4, 1, 2, {1, 1}, {1}), ShapeError);     // duplicate row
  EXPECT_THROW(SSCMatrix(4, 1, 2, {2, 1}, {1}), ShapeError);     // unsorted
  EXPECT_THROW(SSCMatrix(4, 1, 2, {1, 4}, {1}), ShapeError);     // out of range
  EXPECT_THROW(SSCMatrix(4, 1, 2, {0, 1}, {0}), ShapeError);     // bad sign
  EXPECT_THROW(SSCMatrix(4, 2, 2, {0, 1}, {1, 1}), ShapeError);  // short supports
  EXPECT_NO_THROW(SSCMatrix(4, 1, 2, {0, 3}, {-1}));
}

TEST(SSCMatrixTest, IndexErrors) {
  const auto A = sample_matrix(5, 2, 2, {1, 0});
  EXPECT_THROW(A.support(2), ShapeError);
  EXPECT_THROW(A.sign(2), ShapeError);
  EXPECT_THROW(A.entry(5, 0), ShapeError);
}

TEST(MatrixSerialization, RoundTripIsBitExact) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto A = sample_matrix(10 + t * 13, 1 + t * 3, 1 + t % 9, {0xdeadbeefULL + t, t});
    std::stringstream buffer;
    write_matrix(buffer, A);
    const std::string bytes = buffer.str();
    const auto B = read_matrix(buffer);
    EXPECT_EQ(A, B);
    std::stringstream again;
    write_matrix(again, B);
    EXPECT_EQ(again.str(), bytes);
  }
}

TEST(MatrixSerialization, LayoutHeader) {
  const auto A = sample_matrix(4, 1, 2, {0x0102030405060708ULL, 9});
  std::stringstream buffer;
  write_matrix(buffer, A);
  const std::string bytes = buffer.str();
  ASSERT_EQ(bytes.size(), 8u + 4u + 5 * 8u + 2 * 4u + 1u);
  EXPECT_EQ(bytes.substr(0, 7), "SSJLMAT");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);  // version, little-endian
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 4u);  // d
  EXPECT_EQ(static_cast<unsigned char>(bytes[36]), 0x08u);  // master seed low byte
}

TEST(MatrixSerialization, RejectsCorruptInput) {
  const auto A = sample_matrix(6, 3, 2, {5, 0});
  std::stringstream buffer;
  write_matrix(buffer, A);
  std::string bytes = buffer.str();

  std::stringstream truncated(bytes.substr(0, bytes.size() - 1));
  EXPECT_THROW(read_matrix(truncated), InputError);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream magic(bad_magic);
  EXPECT_THROW(read_matrix(magic), InputError);

  std::string bad_version = bytes;
  bad_version[8] = 2;
  std::stringstream version(bad_version);
  EXPECT_THROW(read_matrix(version), InputError);

  std::string bad_row = bytes;
  bad_row[52] = 100;  // first support entry out of range
  std::stringstream row(bad_row);
  EXPECT_THROW(read_matrix(row), InputError);
}
