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

#include "opct/importance.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "opct/synthetic.hpp"

namespace opct {
namespace {

TreeNode leaf(std::size_t n) {
  TreeNode node;
  node.n_examples = n;
  node.prototype = {0.0};
  return node;
}

TreeNode split(std::size_t n, Vector w, std::size_t neg, std::size_t pos) {
  TreeNode node;
  node.is_leaf = false;
  node.n_examples = n;
  node.plane = Hyperplane{std::move(w), 0.0};
  node.negative = neg;
  node.positive = pos;
  return node;
}

Tree make_tree(std::vector<TreeNode> nodes, std::size_t d, std::size_t n) {
  Tree t;
  t.nodes = std::move(nodes);
  t.n_features = d;
  t.n_targets = 1;
  t.total_training_examples = n;
  return t;
}

TEST(TreeImportanceTest, Examples) {
  EXPECT_EQ(tree_importance(make_tree({leaf(4)}, 3, 4)), (Vector{0, 0, 0}));
  const Tree one = make_tree({split(6, {2, -1, 0}, 1, 2), leaf(3), leaf(3)}, 3, 6);
  const Vector a = tree_importance(one);
  EXPECT_DOUBLE_EQ(a[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(a[1], 1.0 / 3.0);
  EXPECT_EQ(a[2], 0.0);
  const Tree two = make_tree({split(8, {1, 0}, 1, 4), split(4, {0, 1}, 2, 3), leaf(2), leaf(2), leaf(4)}, 2, 8);
  EXPECT_EQ(tree_importance(two), (Vector{1.0, 0.5}));
}

TEST(EnsembleImportanceTest, Examples) {
  EnsembleModel m;
  m.n_features = 2;
  const Tree a = make_tree({split(2, {1, 0}, 1, 2), leaf(1), leaf(1)}, 2, 2);
  const Tree b = make_tree({split(2, {0, 3}, 1, 2), leaf(1), leaf(1)}, 2, 2);
  m.trees = {a, a};
  EXPECT_EQ(ensemble_importance(m), tree_importance(a));
  m.trees = {a, b};
  EXPECT_EQ(ensemble_importance(m), (Vector{0.5, 0.5}));
  m.trees = {make_tree({leaf(2)}, 2, 2)};
  EXPECT_EQ(ensemble_importance(m), (Vector{0, 0}));
}

TEST(ImportancePropertyTest, BoundsAndZeroWeights) {
  const Dataset ds = synthetic::nonlinear_regression(200, 6, 2, 3, 111);
  for (const auto v : {SplitVariant::kSvm, SplitVariant::kGrad}) {
    GrowConfig cfg;
    cfg.split.variant = v;
    const Tree t = grow(ds.x, ds.y, ds.z, ds.p, cfg);
    const Vector imp = tree_importance(t);
    double bound = 0.0;
    std::size_t splits = 0;
    std::vector<bool> ever_used(6, false);
    for (const auto& node : t.nodes) {
      if (node.is_leaf) continue;
      ++splits;
      bound += static_cast<double>(node.n_examples) / 200.0;
      for (std::size_t j = 0; j < 6; ++j) ever_used[j] = ever_used[j] || node.plane.w[j] != 0.0;
    }
    for (std::size_t j = 0; j < 6; ++j) {
      EXPECT_GE(imp[j], 0.0);
      EXPECT_LE(imp[j], bound + 1e-12);
      if (!ever_used[j]) {
        EXPECT_EQ(imp[j], 0.0);
      }
    }
    EXPECT_LE(std::accumulate(imp.begin(), imp.end(), 0.0), static_cast<double>(splits) + 1e-12);
  }
}

TEST(ImportancePropertyTest, PermutationEquivariance) {
  const Dataset ds = synthetic::nonlinear_regression(150, 5, 2, 5, 112);
  const Tree t = grow(ds.x, ds.y, ds.z, ds.p, GrowConfig{});
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};  // new column k holds old column perm[k]
  Tree relabeled = t;
  for (auto& node : relabeled.nodes) {
    if (node.is_leaf) continue;
    Vector w(5);
    Vector sw(5);
    for (std::size_t k = 0; k < 5; ++k) {
      w[k] = node.plane.w[perm[k]];
      sw[k] = node.standardized_w[perm[k]];
    }
    node.plane.w = w;
    node.standardized_w = sw;
  }
  const Vector before = tree_importance(t);
  const Vector after = tree_importance(relabeled);
  for (std::size_t k = 0; k < 5; ++k) EXPECT_DOUBLE_EQ(after[k], before[perm[k]]);
}

TEST(ImportancePropertyTest, StandardizedWeightsUseNodeStd) {
  const Dataset ds = synthetic::nonlinear_regression(200, 4, 2, 5, 116);
  GrowConfig cfg;
  cfg.max_depth = 1;
  const Tree t = grow(ds.x, ds.y, ds.z, ds.p, cfg);
  ASSERT_FALSE(t.nodes[0].is_leaf);
  const DenseMatrix x = to_dense(ds.x);
  for (std::size_t j = 0; j < 4; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 200; ++i) mean += x(i, j);
    mean /= 200.0;
    double var = 0.0;
    for (std::size_t i = 0; i < 200; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(var / 200.0);
    EXPECT_NEAR(t.nodes[0].standardized_w[j], t.nodes[0].plane.w[j] * sd, 1e-9);
  }
}

TEST(ImportancePropertyTest, InvariantToColumnRescaling) {
  const Dataset ds = synthetic::nonlinear_regression(200, 4, 2, 5, 117);
  Dataset scaled = ds;
  DenseMatrix x = to_dense(ds.x);
  for (std::size_t i = 0; i < 200; ++i) x(i, 2) *= 100.0;
  scaled.x = Matrix(std::move(x));
  GrowConfig cfg;
  cfg.split.variant = SplitVariant::kSvm;
  cfg.max_depth = 1;
  const Vector a = tree_importance(grow(ds.x, ds.y, ds.z, ds.p, cfg));
  const Vector b = tree_importance(grow(scaled.x, scaled.y, scaled.z, scaled.p, cfg));
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(a[j], b[j], 1e-6);
}

TEST(NoiseAuditTest, InformativeToy) {
  const Dataset ds = synthetic::oblique_toy(200, 113);
  EnsembleConfig cfg;
  cfg.n_trees = 10;
  cfg.grow.split.variant = SplitVariant::kGrad;
  Rng rng(1);
  const auto report = noise_audit(ds, cfg, rng);
  ASSERT_EQ(report.importance.size(), 4u);
  EXPECT_LT(report.noise_mean, report.real_mean);
  std::ostringstream csv;
  write_importance_csv(csv, report);
  EXPECT_EQ(csv.str().substr(0, 28), "feature_id,group,importance\n");
  EXPECT_NE(csv.str().find("\n3,noise,"), std::string::npos);
}

TEST(NoiseAuditTest, SparseNoiseMatchesDensity) {
  const Dataset ds = synthetic::sparse_regression(500, 20, 1, 0.05, 114);
  Rng rng(2);
  const Matrix aug = append_noise_features(ds.x, rng);
  ASSERT_TRUE(aug.is_sparse());
  ASSERT_EQ(aug.cols(), 40u);
  std::vector<std::size_t> nnz(40, 0);
  for (std::size_t i = 0; i < aug.rows(); ++i) {
    aug.for_each_in_row(i, [&](std::size_t j, double v) {
      if (v != 0.0) ++nnz[j];
    });
  }
  for (std::size_t j = 0; j < 20; ++j) {
    EXPECT_EQ(nnz[20 + j], nnz[j]);
    EXPECT_LE(std::abs(static_cast<double>(nnz[20 + j]) - static_cast<double>(nnz[j])), 0.2 * nnz[j]);
  }
  for (std::size_t i = 0; i < 500; ++i) {
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(aug.at(i, j), ds.x.at(i, j));
  }
}

TEST(NoiseAuditTest, DenseNoiseIsUniform) {
  const Dataset ds = synthetic::oblique_toy(300, 115);
  Rng rng(3);
  const DenseMatrix aug = to_dense(append_noise_features(ds.x, rng));
  double mean = 0.0;
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t j = 2; j < 4; ++j) {
      EXPECT_GE(aug(i, j), 0.0);
      EXPECT_LT(aug(i, j), 1.0);
      mean += aug(i, j);
    }
  }
  EXPECT_NEAR(mean / 600.0, 0.5, 0.05);
}

}  // namespace
}  // namespace opct
