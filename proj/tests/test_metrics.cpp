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

#include "opct/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"

namespace opct {
namespace {

TEST(R2Test, Examples) {
  const Vector y{1, 2, 3};
  EXPECT_EQ(r2(y, y), 1.0);
  EXPECT_EQ(r2(y, Vector{2, 2, 2}), 0.0);
  EXPECT_THROW(r2(y, Vector{1, 2}), std::invalid_argument);
  EXPECT_THROW(r2(Vector{1}, Vector{1}), std::invalid_argument);
}

TEST(R2Test, ConstantTruth) {
  EXPECT_EQ(r2(Vector{2, 2}, Vector{2, 2}), 1.0);
  EXPECT_EQ(r2(Vector{2, 2}, Vector{2, 3}), kUndefinedR2);
}

TEST(MeanR2Test, Examples) {
  const Matrix y = DenseMatrix::from_rows({{1, 1, 5}, {2, 2, 5}, {3, 3, 5}});
  const Matrix yhat = DenseMatrix::from_rows({{1, 2, 4}, {2, 2, 4}, {3, 2, 4}});
  const MeanR2 r = mean_r2(y, yhat);
  EXPECT_EQ(r.value, 0.5);
  EXPECT_EQ(r.undefined, 1u);
  const Matrix single = DenseMatrix::from_rows({{1}, {2}, {4}});
  const Matrix single_hat = DenseMatrix::from_rows({{1.5}, {2}, {3}});
  EXPECT_EQ(mean_r2(single, single_hat).value, r2(Vector{1, 2, 4}, Vector{1.5, 2, 3}));
}

TEST(F1Test, Examples) {
  EXPECT_EQ(f1_binary(Vector{1, 0, 1}, Vector{1, 0, 1}), 1.0);
  EXPECT_EQ(f1_binary(Vector{1, 0, 1}, Vector{1, 1, 0}), 0.5);
  EXPECT_EQ(f1_binary(Vector{0, 0}, Vector{0, 0}), 0.0);
}

TEST(MacroF1Test, Examples) {
  const std::vector<std::size_t> y{0, 1, 2};
  EXPECT_EQ(f1_macro(y, y, 3), 1.0);
  const std::vector<std::size_t> yhat{0, 1, 1};
  EXPECT_NEAR(f1_macro(y, yhat, 3), 5.0 / 9.0, 1e-15);
  const std::vector<std::size_t> b{0, 1, 1, 0}, bhat{0, 1, 0, 0};
  const double pos = f1_binary(Vector{0, 1, 1, 0}, Vector{0, 1, 0, 0});
  const double neg = f1_binary(Vector{1, 0, 0, 1}, Vector{1, 0, 1, 1});
  EXPECT_NEAR(f1_macro(b, bhat, 2), (pos + neg) / 2, 1e-15);
}

TEST(LrapTest, Examples) {
  const Vector w{1, 1, 1};
  EXPECT_EQ(lrap_weighted(DenseMatrix::from_rows({{1, 0, 1}}), DenseMatrix::from_rows({{0.9, 0.1, 0.8}}), w).value,
            1.0);
  EXPECT_NEAR(
      lrap_weighted(DenseMatrix::from_rows({{1, 0, 1}}), DenseMatrix::from_rows({{0.9, 0.8, 0.7}}), w).value,
      5.0 / 6.0, 1e-15);
  EXPECT_EQ(lrap_weighted(DenseMatrix::from_rows({{1, 0}}), DenseMatrix::from_rows({{0.3, 0.3}}), Vector{1, 1}).value,
            0.5);
}

TEST(LrapTest, EmptyLabelSetsAreSkipped) {
  const auto r = lrap_weighted(DenseMatrix::from_rows({{0, 0}, {1, 0}}), DenseMatrix::from_rows({{1, 2}, {2, 1}}),
                               Vector{1, 1});
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.evaluated, 1u);
  EXPECT_EQ(r.skipped, 1u);
}

TEST(EvaluateTest, Dispatch) {
  const Matrix y = DenseMatrix::from_rows({{1, 0, 1}, {0, 1, 0}, {1, 1, 0}});
  const Matrix s = DenseMatrix::from_rows({{0.2, 0.5, 0.6}, {0.9, 0.1, 0.3}, {0.4, 0.4, 0.4}});
  const auto mlc = evaluate(Task::kMlc, y, s);
  EXPECT_EQ(mlc.metric, "lrap");
  EXPECT_EQ(mlc.value, lrap_weighted(y, s, Vector{1, 1, 1}).value);
  const HierarchyGraph flat({"a", "b", "c"}, {});
  const auto hmlc = evaluate(Task::kHmlc, y, s, &flat);
  EXPECT_EQ(hmlc.metric, "weighted_lrap");
  EXPECT_EQ(hmlc.value, mlc.value);
  EXPECT_THROW(evaluate(Task::kHmlc, y, s), std::invalid_argument);

  const Matrix yb = DenseMatrix::from_rows({{1}, {0}, {1}});
  EXPECT_EQ(evaluate(Task::kBin, yb, yb).value, 1.0);
  EXPECT_EQ(evaluate(Task::kBin, yb, DenseMatrix::from_rows({{0.5}, {0.49}, {0.7}})).value, 1.0);
  const Matrix ym = DenseMatrix::from_rows({{1, 0}, {0, 1}});
  EXPECT_EQ(evaluate(Task::kMcc, ym, DenseMatrix::from_rows({{0.6, 0.4}, {0.5, 0.5}})).metric, "macro_f1");
  EXPECT_EQ(evaluate(Task::kStr, yb, yb).metric, "r2");
  EXPECT_EQ(evaluate(Task::kMtr, y, y).metric, "mean_r2");
}

// Brute-force oracle comparisons on random instances.
TEST(MetricsOracleTest, LrapMatchesDoubleLoop) {
  std::mt19937_64 gen(81);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = trial < 100 ? 20 : 1 + gen() % 10;
    const std::size_t l = trial < 100 ? 10 : 1 + gen() % 8;
    oracle::Rows y(n, std::vector<double>(l)), s(n, std::vector<double>(l));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < l; ++j) {
        y[i][j] = unit(gen) < 0.3 ? 1.0 : 0.0;
        s[i][j] = std::round(unit(gen) * 5) / 5;  // coarse scores create ties
      }
    }
    std::vector<double> w(l, 1.0);
    if (trial % 2) {
      for (auto& v : w) v = unit(gen) + 0.1;
    }
    const double got = lrap_weighted(oracle::sparse(y), oracle::dense(s), w).value;
    EXPECT_NEAR(got, oracle::lrap(y, s, w), 1e-12);
  }
}

TEST(MetricsOracleTest, R2AndF1MatchDirectFormulas) {
  std::mt19937_64 gen(82);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 30;
    Vector y(n), yhat(n), yb(n), yhb(n);
    std::vector<int> yi(n), yhi(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = unit(gen) * 10;
      yhat[i] = y[i] + unit(gen) - 0.5;
      yi[i] = unit(gen) < 0.4;
      yhi[i] = unit(gen) < 0.5;
      yb[i] = yi[i];
      yhb[i] = yhi[i];
    }
    EXPECT_NEAR(r2(y, yhat), oracle::r2(y, yhat), 1e-10);
    EXPECT_NEAR(f1_binary(yb, yhb), oracle::f1(yi, yhi), 1e-12);
    std::vector<std::size_t> cy(n), ch(n);
    std::vector<int> cyi(n), chi(n);
    for (std::size_t i = 0; i < n; ++i) {
      cy[i] = gen() % 3;
      ch[i] = gen() % 3;
      cyi[i] = static_cast<int>(cy[i]);
      chi[i] = static_cast<int>(ch[i]);
    }
    const double macro = (oracle::f1(cyi, chi, 0) + oracle::f1(cyi, chi, 1) + oracle::f1(cyi, chi, 2)) / 3.0;
    EXPECT_NEAR(f1_macro(cy, ch, 3), macro, 1e-12);
  }
}

TEST(MetricsPropertyTest, RangesAndMonotoneInvariance) {
  std::mt19937_64 gen(83);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    DenseMatrix y(8, 5), s(8, 5), t(8, 5);
    for (std::size_t i = 0; i < 8; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        y(i, j) = unit(gen) < 0.4 ? 1.0 : 0.0;
        s(i, j) = unit(gen);
        t(i, j) = std::exp(3 * s(i, j)) - 7;  // strictly increasing map
      }
    }
    const Vector w(5, 1.0);
    const double a = lrap_weighted(y, s, w).value;
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    EXPECT_NEAR(a, lrap_weighted(y, t, w).value, 1e-15);
    Vector yv(8), sv(8);
    for (std::size_t i = 0; i < 8; ++i) {
      yv[i] = y(i, 0) * 3 + unit(gen);
      sv[i] = unit(gen) * 4;
    }
    EXPECT_LE(r2(yv, sv), 1.0);
  }
}

}  // namespace
}  // namespace opct
