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

// Top-down induction of oblique predictive clustering trees.
//
// Nodes are stored in a flat vector in pre-order (negative child first), which
// is also the order of the binary format. Routing sends x to the positive
// child when x·w + b >= 0.

#ifndef OPCT_TREE_HPP_
#define OPCT_TREE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "opct/binary_io.hpp"
#include "opct/common.hpp"
#include "opct/matrix.hpp"
#include "opct/preprocess.hpp"
#include "opct/split.hpp"

namespace opct {

struct TreeNode {
  bool is_leaf = true;
  std::size_t n_examples = 0;
  // Split nodes only. `plane` routes raw feature vectors; `standardized_w`
  // holds the same weights in node-standardized units (w_j·σ_j), which is
  // the scale importance is measured on. Empty for hand-built nodes.
  Hyperplane plane;
  Vector standardized_w;
  std::size_t negative = 0;
  std::size_t positive = 0;
  // Leaves only.
  Vector prototype;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  Task task = Task::kMtr;
  std::size_t n_features = 0;
  std::size_t n_targets = 0;
  std::size_t total_training_examples = 0;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct GrowConfig {
  SplitConfig split;
  Task task = Task::kMtr;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_examples_to_split = 2;
  double impurity_reduction_threshold = 0.05;
  double feature_subset_fraction = 1.0;
  std::uint64_t seed = 0;
};

inline std::size_t node_count(const Tree& tree) { return tree.nodes.size(); }

// Depth of the deepest leaf; a single leaf has depth 0.
inline std::size_t tree_depth(const Tree& tree) {
  if (tree.nodes.empty()) return 0;
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [idx, depth] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, depth);
    const auto& node = tree.nodes[idx];
    if (!node.is_leaf) {
      stack.emplace_back(node.negative, depth + 1);
      stack.emplace_back(node.positive, depth + 1);
    }
  }
  return deepest;
}

inline std::size_t leaf_index(const Tree& tree, std::span<const double> x) {
  std::size_t idx = 0;
  while (!tree.nodes[idx].is_leaf) {
    const auto& node = tree.nodes[idx];
    idx = detail::dense_dot(x, node.plane.w) + node.plane.b >= 0.0 ? node.positive : node.negative;
  }
  return idx;
}

inline const Vector& predict_one(const Tree& tree, std::span<const double> x) {
  if (x.size() != tree.n_features) throw std::invalid_argument("predict_one: feature count mismatch");
  return tree.nodes[leaf_index(tree, x)].prototype;
}

// Leaf reached by row i of x.
inline std::size_t leaf_index(const Tree& tree, const Matrix& x, std::size_t row) {
  std::size_t idx = 0;
  while (!tree.nodes[idx].is_leaf) {
    const auto& node = tree.nodes[idx];
    idx = node.plane.margin(x, row) >= 0.0 ? node.positive : node.negative;
  }
  return idx;
}

// N×T prototypes for every row.
inline DenseMatrix predict_tree(const Tree& tree, const Matrix& x) {
  if (x.cols() != tree.n_features) throw std::invalid_argument("predict: feature count mismatch");
  DenseMatrix out(x.rows(), tree.n_targets);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto& proto = tree.nodes[leaf_index(tree, x, i)].prototype;
    std::copy(proto.begin(), proto.end(), out.row(i).begin());
  }
  return out;
}

// Finds a split for one node: (X rows, Z rows, p, node rng, feature subset).
using SplitFinder = std::function<std::optional<Hyperplane>(const Matrix&, const Matrix&, std::span<const double>,
                                                            Rng&, std::span<const std::size_t>)>;

namespace detail {

inline std::vector<std::size_t> draw_feature_subset(std::size_t d, double fraction, Rng& rng) {
  if (fraction >= 1.0) return {};
  const auto k = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(d))), 1, d);
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, d - 1)(rng);
    std::swap(all[i], all[j]);
  }
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

// Relative impurity of a subset with respect to the parent node: Σ_j p_j
// var_sub_j / var_parent_j over the parent's non-constant columns, divided by
// Σ_j p_j over those columns.
inline double relative_impurity(const Matrix& z_sub, std::span<const double> p, std::span<const double> parent_var,
                                double parent_norm) {
  const auto [mean, var] = colmoments(z_sub);
  double total = 0.0;
  for (std::size_t j = 0; j < var.size(); ++j) {
    if (std::sqrt(parent_var[j]) >= kMinStd) total += p[j] * var[j] / parent_var[j];
  }
  return total / parent_norm;
}

}  // namespace detail

// Induction shell shared by the oblique learners and the axis-parallel
// baseline. A split is accepted when the node has enough examples, the depth
// limit allows it, both sides are non-empty, and at least one side reduces
// the node impurity by the configured relative amount. Otherwise the node
// becomes a leaf predicting the column means of Y.
inline Tree grow_with(const Matrix& x, const Matrix& y, const Matrix& z, std::span<const double> p,
                      const GrowConfig& cfg, const SplitFinder& find_split) {
  if (x.rows() != y.rows() || x.rows() != z.rows()) throw std::invalid_argument("grow: row counts differ");
  if (x.rows() == 0) throw std::invalid_argument("grow: no training examples");
  if (p.size() != z.cols()) throw std::invalid_argument("grow: clustering weight count does not match Z");

  Tree tree;
  tree.task = cfg.task;
  tree.n_features = x.cols();
  tree.n_targets = y.cols();
  tree.total_training_examples = x.rows();

  struct Pending {
    std::vector<std::size_t> rows;
    std::size_t depth;
    std::size_t parent;
    bool positive_side;
  };
  constexpr auto kNoParent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), 0);
  std::vector<Pending> stack;
  stack.push_back({std::move(all), 0, kNoParent, false});

  const std::size_t min_examples = std::max<std::size_t>(cfg.min_examples_to_split, 2);
  while (!stack.empty()) {
    Pending task = std::move(stack.back());
    stack.pop_back();
    const std::size_t idx = tree.nodes.size();
    tree.nodes.emplace_back();
    if (task.parent != kNoParent) {
      auto& parent = tree.nodes[task.parent];
      (task.positive_side ? parent.positive : parent.negative) = idx;
    }
    tree.nodes[idx].n_examples = task.rows.size();

    std::optional<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> children;
    const bool depth_ok = !cfg.max_depth || task.depth < *cfg.max_depth;
    if (task.rows.size() >= min_examples && depth_ok) {
      const Matrix z_node = take_rows(z, task.rows);
      const auto [z_mean, z_var] = colmoments(z_node);
      double parent_norm = 0.0;
      for (std::size_t j = 0; j < z_var.size(); ++j) {
        if (std::sqrt(z_var[j]) >= kMinStd) parent_norm += p[j];
      }
      if (parent_norm > 0.0) {
        const Matrix x_node = take_rows(x, task.rows);
        Rng rng(derive_seed(cfg.seed, idx));
        const auto subset = detail::draw_feature_subset(x.cols(), cfg.feature_subset_fraction, rng);
        if (auto plane = find_split(x_node, z_node, p, rng, subset)) {
          std::vector<std::size_t> neg_local, pos_local;
          for (std::size_t i = 0; i < task.rows.size(); ++i) {
            (plane->margin(x_node, i) >= 0.0 ? pos_local : neg_local).push_back(i);
          }
          if (!neg_local.empty() && !pos_local.empty()) {
            const double neg_rel = detail::relative_impurity(take_rows(z_node, neg_local), p, z_var, parent_norm);
            const double pos_rel = detail::relative_impurity(take_rows(z_node, pos_local), p, z_var, parent_norm);
            const double reduction = std::max(1.0 - neg_rel, 1.0 - pos_rel);
            if (reduction >= cfg.impurity_reduction_threshold) {
              const auto [x_mean, x_var] = colmoments(x_node);
              Vector scaled(plane->w.size(), 0.0);
              for (std::size_t j = 0; j < scaled.size(); ++j) {
                if (plane->w[j] != 0.0) scaled[j] = plane->w[j] * std::sqrt(x_var[j]);
              }
              tree.nodes[idx].is_leaf = false;
              tree.nodes[idx].plane = std::move(*plane);
              tree.nodes[idx].standardized_w = std::move(scaled);
              for (auto& r : neg_local) r = task.rows[r];
              for (auto& r : pos_local) r = task.rows[r];
              children.emplace(std::move(neg_local), std::move(pos_local));
            }
          }
        }
      }
    }

    if (children) {
      // Positive pushed first so the negative subtree is numbered next.
      stack.push_back({std::move(children->second), task.depth + 1, idx, true});
      stack.push_back({std::move(children->first), task.depth + 1, idx, false});
    } else {
      tree.nodes[idx].prototype = colmean(take_rows(y, task.rows));
    }
  }
  return tree;
}

inline Tree grow(const Matrix& x, const Matrix& y, const Matrix& z, std::span<const double> p, const GrowConfig& cfg) {
  if (cfg.split.variant == SplitVariant::kAxis) {
    throw std::invalid_argument("grow: use grow_axis_parallel for the axis variant");
  }
  const SplitConfig split_cfg = cfg.split;
  return grow_with(x, y, z, p, cfg,
                   [split_cfg](const Matrix& xn, const Matrix& zn, std::span<const double> pn, Rng& rng,
                               std::span<const std::size_t> subset) {
                     return learn_split(split_cfg, xn, zn, pn, rng, subset);
                   });
}

// ---------------------------------------------------------------------------
// Binary format
//
//   "OPCT" | u32 version | u8 task | u64 D | u64 T | u64 N | u64 node count
//   then per node in pre-order:
//     u8 kind (0 leaf, 1 split) | u64 n_examples
//     leaf:  T × f64 prototype
//     split: f64 bias | u8 has standardized weights | u64 nnz
//            | nnz × (u64 feature index, f64 weight [, f64 standardized weight])
//
// All integers and doubles little-endian.

inline constexpr std::uint32_t kTreeFormatVersion = 1;

inline void write_tree(ByteWriter& out, const Tree& tree) {
  out.raw(std::string_view("OPCT"));
  out.u32(kTreeFormatVersion);
  out.u8(static_cast<std::uint8_t>(tree.task));
  out.u64(tree.n_features);
  out.u64(tree.n_targets);
  out.u64(tree.total_training_examples);
  out.u64(tree.nodes.size());
  for (const auto& node : tree.nodes) {
    out.u8(node.is_leaf ? 0 : 1);
    out.u64(node.n_examples);
    if (node.is_leaf) {
      for (double v : node.prototype) out.f64(v);
      continue;
    }
    const bool scaled = !node.standardized_w.empty();
    out.f64(node.plane.b);
    out.u8(scaled ? 1 : 0);
    out.u64(node.plane.nonzero_count());
    for (std::size_t j = 0; j < node.plane.w.size(); ++j) {
      if (node.plane.w[j] == 0.0) continue;
      out.u64(j);
      out.f64(node.plane.w[j]);
      if (scaled) out.f64(node.standardized_w[j]);
    }
  }
}

inline std::vector<std::uint8_t> serialize(const Tree& tree) {
  ByteWriter out;
  write_tree(out, tree);
  return std::move(out).take();
}

inline Tree read_tree(ByteReader& in) {
  const std::size_t magic_at = in.offset();
  const auto magic = in.raw(4, "magic");
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "OPCT") in.fail("bad magic", magic_at);
  const std::size_t version_at = in.offset();
  if (const auto version = in.u32(); version != kTreeFormatVersion) {
    in.fail("unsupported tree format version " + std::to_string(version), version_at);
  }
  Tree tree;
  const std::size_t task_at = in.offset();
  const auto task = in.u8();
  if (task > static_cast<std::uint8_t>(Task::kHmlc)) in.fail("unknown task tag", task_at);
  tree.task = static_cast<Task>(task);
  tree.n_features = in.u64();
  tree.n_targets = in.u64();
  tree.total_training_examples = in.u64();
  const std::size_t count_at = in.offset();
  const std::uint64_t count = in.u64();
  // Every node needs at least 9 bytes.
  if (count == 0 || count > in.remaining() / 9) in.fail("implausible node count", count_at);

  tree.nodes.resize(count);
  // Split nodes still waiting for children: (index, children attached).
  std::vector<std::pair<std::size_t, int>> open;
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0) {
      if (open.empty()) in.fail("node stream has nodes after a complete tree");
      auto& [parent, attached] = open.back();
      if (attached == 0) {
        tree.nodes[parent].negative = k;
        attached = 1;
      } else {
        tree.nodes[parent].positive = k;
        open.pop_back();
      }
    }
    auto& node = tree.nodes[k];
    const std::size_t kind_at = in.offset();
    const auto kind = in.u8();
    if (kind > 1) in.fail("unknown node kind", kind_at);
    node.is_leaf = kind == 0;
    node.n_examples = in.u64();
    if (node.is_leaf) {
      node.prototype.resize(tree.n_targets);
      for (double& v : node.prototype) v = in.f64();
      continue;
    }
    node.plane.b = in.f64();
    node.plane.w.assign(tree.n_features, 0.0);
    const std::size_t flag_at = in.offset();
    const auto flag = in.u8();
    if (flag > 1) in.fail("bad standardized-weight flag", flag_at);
    const bool scaled = flag == 1;
    if (scaled) node.standardized_w.assign(tree.n_features, 0.0);
    const std::size_t nnz_at = in.offset();
    const std::uint64_t nnz = in.u64();
    if (nnz > tree.n_features || nnz > in.remaining() / (scaled ? 24 : 16)) {
      in.fail("implausible weight count", nnz_at);
    }
    std::size_t last = 0;
    for (std::uint64_t e = 0; e < nnz; ++e) {
      const std::size_t index_at = in.offset();
      const std::uint64_t index = in.u64();
      if (index >= tree.n_features || (e > 0 && index <= last)) in.fail("bad weight index", index_at);
      last = index;
      node.plane.w[index] = in.f64();
      if (scaled) node.standardized_w[index] = in.f64();
    }
    open.emplace_back(k, 0);
  }
  if (!open.empty()) in.fail("node stream ends before the tree is complete");
  return tree;
}

inline Tree deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  Tree tree = read_tree(in);
  if (!in.at_end()) in.fail("trailing bytes after tree");
  return tree;
}

}  // namespace opct

#endif  // OPCT_TREE_HPP_
