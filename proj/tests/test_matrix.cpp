/*
 * Copyright 2026 The OPCT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "opct/matrix.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace opct {
namespace {

TEST(MatrixTest, MatvecIdentity) {
  const Matrix m = DenseMatrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(matvec(m, Vector{3, -1}), (Vector{3, -1}));
}

TEST(MatrixTest, MatvecZeroSparse) {
  const Matrix m = SparseMatrix(3, 4);
  EXPECT_EQ(matvec(m, Vector{1, 2, 3, 4}), (Vector{0, 0, 0}));
}

TEST(MatrixTest, MatvecCsr) {
  const Matrix m = to_sparse(DenseMatrix::from_rows({{1, 2}, {0, 3}}));
  ASSERT_TRUE(m.is_sparse());
  EXPECT_EQ(matvec(m, Vector{1, 1}), (Vector{3, 3}));
}

TEST(MatrixTest, MatvecDimensionMismatch) {
  const Matrix m = DenseMatrix(2, 3);
  EXPECT_THROW(matvec(m, Vector{1, 2}), std::invalid_argument);
  EXPECT_THROW(matvec(Matrix(SparseMatrix(2, 3)), Vector{1}), std::invalid_argument);
}

TEST(MatrixTest, WeightedColmean) {
  EXPECT_EQ(weighted_colmean(DenseMatrix::from_rows({{1}, {3}}), Vector{1, 1}), (Vector{2}));
  EXPECT_EQ(weighted_colmean(DenseMatrix::from_rows({{0}, {1}}), Vector{1, 3}), (Vector{0.75}));
  const Matrix m = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(weighted_colmean(m, Vector{0, 1, 0}), (Vector{3, 4}));
}

TEST(MatrixTest, WeightedColmeanDegenerate) {
  const Matrix m = DenseMatrix::from_rows({{1}, {3}});
  EXPECT_THROW(weighted_colmean(m, Vector{0, 0}), DegenerateWeights);
  EXPECT_THROW(weighted_colvar(m, Vector{0, 0}), DegenerateWeights);
}

TEST(MatrixTest, WeightedColvar) {
  EXPECT_DOUBLE_EQ(weighted_colvar(DenseMatrix::from_rows({{1}, {3}}), Vector{1, 1})[0], 1.0);
  EXPECT_NEAR(weighted_colvar(DenseMatrix::from_rows({{0}, {1}}), Vector{1, 3})[0], 0.1875, 1e-15);
  EXPECT_EQ(weighted_colvar(DenseMatrix::from_rows({{5}, {5}, {5}}), Vector{0.2, 1, 3})[0], 0.0);
}

TEST(MatrixTest, Colmean) {
  EXPECT_EQ(colmean(DenseMatrix::from_rows({{0, 1}, {2, 3}})), (Vector{1, 2}));
  EXPECT_EQ(colmean(DenseMatrix::from_rows({{4, 5, 6}})), (Vector{4, 5, 6}));
  const Matrix s = SparseMatrix(3, 4, {0, 1, 1, 1}, {2}, {6.0});
  EXPECT_EQ(colmean(s), (Vector{0, 0, 2, 0}));
  EXPECT_THROW(colmean(DenseMatrix(0, 2)), std::invalid_argument);
}

TEST(MatrixTest, DenseRejectsNonFinite) {
  EXPECT_THROW(DenseMatrix(1, 1, std::vector<double>{std::nan("")}), std::invalid_argument);
  EXPECT_THROW(DenseMatrix(1, 2, std::vector<double>{1.0}), std::invalid_argument);
}

TEST(MatrixTest, SparseCanonicalization) {
  const SparseMatrix m(2, 4, {0, 3, 4}, {3, 0, 1, 2}, {4.0, 1.0, 0.0, 5.0});
  EXPECT_EQ(m.nnz(), 3u);
  const auto r0 = m.row(0);
  ASSERT_EQ(r0.indices.size(), 2u);
  EXPECT_EQ(r0.indices[0], 0u);
  EXPECT_EQ(r0.indices[1], 3u);
  EXPECT_EQ(m.at(1, 2), 5.0);
  EXPECT_THROW(SparseMatrix(1, 2, {0, 2}, {1, 1}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(SparseMatrix(1, 2, {0, 1}, {2}, {1.0}), std::invalid_argument);
}

TEST(MatrixTest, TakeRowsAndCols) {
  const Matrix m = DenseMatrix::from_rows({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
  const std::vector<std::size_t> rows{2, 0, 2};
  const std::vector<std::size_t> cols{0, 2};
  EXPECT_EQ(to_dense(take_rows(m, rows)), DenseMatrix::from_rows({{7, 8, 9}, {1, 2, 3}, {7, 8, 9}}));
  EXPECT_EQ(to_dense(take_cols(m, cols)), DenseMatrix::from_rows({{1, 3}, {4, 6}, {7, 9}}));
  EXPECT_EQ(to_dense(take_cols(Matrix(to_sparse(m)), cols)), DenseMatrix::from_rows({{1, 3}, {4, 6}, {7, 9}}));
}

TEST(MatrixTest, AutoRepresentationUsesDensity) {
  DenseMatrix m(10, 10, 0.0);
  m(0, 0) = 1.0;
  EXPECT_TRUE(auto_representation(m).is_sparse());
  DenseMatrix full(2, 2, 1.0);
  EXPECT_FALSE(auto_representation(Matrix(to_sparse(full))).is_sparse());
}

// Every kernel agrees exactly between the dense and CSR forms.
TEST(MatrixPropertyTest, RepresentationEquivalence) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 30;
    const std::size_t d = 1 + rng() % 12;
    const auto rows = oracle::random_rows(n, d, 0.3 * unit(rng), rng);
    const Matrix dm = oracle::dense(rows);
    const Matrix sm = oracle::sparse(rows);
    Vector v(d), a(n);
    for (auto& x : v) x = unit(rng) * 4 - 2;
    for (auto& x : a) x = unit(rng) + 0.01;
    const Vector u = matvec_transposed(dm, a);
    EXPECT_EQ(matvec(dm, v), matvec(sm, v));
    EXPECT_EQ(u, matvec_transposed(sm, a));
    EXPECT_EQ(weighted_colmean(dm, a), weighted_colmean(sm, a));
    EXPECT_EQ(weighted_colvar(dm, a), weighted_colvar(sm, a));
    EXPECT_EQ(colmean(dm), colmean(sm));
    EXPECT_TRUE(same_content(dm, sm));
  }
}

TEST(MatrixPropertyTest, VarianceNonNegativeAndConsistent) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 20;
    const std::size_t d = 1 + rng() % 6;
    auto rows = oracle::random_rows(n, d, 0.7, rng);
    // A near-constant column stresses cancellation.
    for (auto& r : rows) r[0] = 1e6 + 1e-9 * unit(rng);
    const Matrix m = oracle::dense(rows);
    Vector a(n);
    for (auto& x : a) x = unit(rng);
    const Vector var = weighted_colvar(m, a);
    const Vector mean = weighted_colmean(m, a);
    const Vector mean_sq = weighted_colmean(square(m), a);
    for (std::size_t j = 0; j < d; ++j) {
      EXPECT_GE(var[j], 0.0);
      if (j > 0) {
        EXPECT_NEAR(var[j], mean_sq[j] - mean[j] * mean[j], 1e-10);
      }
    }
  }
}

TEST(MatrixPropertyTest, MatvecLinearity) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto rows = oracle::random_rows(8, 5, 0.5, rng);
    for (const Matrix& m : {Matrix(oracle::dense(rows)), Matrix(oracle::sparse(rows))}) {
      Vector u(5), v(5), mix(5);
      const double alpha = unit(rng), beta = unit(rng);
      for (std::size_t j = 0; j < 5; ++j) {
        u[j] = unit(rng);
        v[j] = unit(rng);
        mix[j] = alpha * u[j] + beta * v[j];
      }
      const Vector lhs = matvec(m, mix);
      const Vector mu = matvec(m, u), mv = matvec(m, v);
      for (std::size_t i = 0; i < lhs.size(); ++i) {
        const double rhs = alpha * mu[i] + beta * mv[i];
        EXPECT_NEAR(lhs[i], rhs, 1e-9 * std::max(1.0, std::abs(rhs)));
      }
    }
  }
}

// Weighted mean and variance against the two-pass oracle.
TEST(MatrixOracleTest, WeightedMomentsMatchTwoPass) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 15;
    const std::size_t d = 1 + rng() % 5;
    const auto rows = oracle::random_rows(n, d, 0.6, rng);
    std::vector<double> a(n);
    for (auto& x : a) x = unit(rng) + 1e-3;
    const Vector mean = weighted_colmean(oracle::dense(rows), a);
    const Vector var = weighted_colvar(oracle::sparse(rows), a);
    for (std::size_t j = 0; j < d; ++j) {
      EXPECT_NEAR(mean[j], oracle::weighted_mean(oracle::column(rows, j), a), 1e-12);
      EXPECT_NEAR(var[j], oracle::weighted_var(oracle::column(rows, j), a), 1e-10);
    }
  }
}

}  // namespace
}  // namespace opct
