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

#ifndef OPCT_PREPROCESS_HPP_
#define OPCT_PREPROCESS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opct/common.hpp"
#include "opct/matrix.hpp"

namespace opct {

// ---------------------------------------------------------------------------
// Standardization

// Columns whose standard deviation falls below this are treated as constant.
inline constexpr double kMinStd = 1e-12;

struct Standardizer {
  Vector means;
  Vector stds;
  // When set, values are only scaled; centering is skipped so sparse data
  // stays sparse.
  bool sparse_mode = false;

  std::size_t size() const { return stds.size(); }
};

// Population statistics; the centering decision is explicit.
inline Standardizer fit_standardizer(const Matrix& m, bool center) {
  if (m.rows() == 0) throw std::invalid_argument("fit_standardizer: empty matrix");
  auto [means, vars] = colmoments(m);
  Standardizer s;
  s.stds.resize(vars.size());
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const double sd = std::sqrt(vars[j]);
    s.stds[j] = sd < kMinStd ? 1.0 : sd;
  }
  s.means = std::move(means);
  s.sparse_mode = !center;
  return s;
}

// Sparse inputs are scaled only; dense inputs are centered and scaled.
inline Standardizer fit_standardizer(const Matrix& m) {
  return fit_standardizer(m, !m.is_sparse());
}

// Sparse input in sparse mode stays CSR. Centering a CSR input produces a
// dense result.
inline Matrix apply_standardizer(const Standardizer& s, const Matrix& m) {
  if (m.cols() != s.size()) {
    throw std::invalid_argument("apply_standardizer: column count does not match");
  }
  if (m.is_sparse() && s.sparse_mode) {
    SparseBuilder builder(m.cols(), m.nnz());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      m.for_each_in_row(i, [&](std::size_t j, double x) { builder.push(j, x / s.stds[j]); });
      builder.end_row();
    }
    return std::move(builder).finish();
  }
  DenseMatrix out = to_dense(m);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = s.sparse_mode ? row[j] / s.stds[j] : (row[j] - s.means[j]) / s.stds[j];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nominal values

// Column-wise encoder for tabular input: numeric columns pass through,
// categorical columns expand to one-hot blocks in first-seen order. A category
// not seen at fit time encodes as an all-zero block.
class FeatureEncoder {
 public:
  struct Column {
    std::string name;
    bool categorical = false;
    std::vector<std::string> categories;
  };

  FeatureEncoder() = default;
  explicit FeatureEncoder(std::vector<Column> columns) : columns_(std::move(columns)) {}

  // A column is categorical when any cell fails to parse as a number.
  static FeatureEncoder fit(const std::vector<std::string>& names,
                            const std::vector<std::vector<std::string>>& rows) {
    std::vector<Column> columns(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      columns[c].name = names[c];
      double ignored = 0.0;
      for (const auto& row : rows) {
        if (!parse_double(row[c], ignored)) {
          columns[c].categorical = true;
          break;
        }
      }
      if (!columns[c].categorical) continue;
      for (const auto& row : rows) {
        auto& cats = columns[c].categories;
        if (std::find(cats.begin(), cats.end(), row[c]) == cats.end()) cats.push_back(row[c]);
      }
    }
    return FeatureEncoder(std::move(columns));
  }

  const std::vector<Column>& columns() const { return columns_; }
  bool empty() const { return columns_.empty(); }

  std::size_t output_width() const {
    std::size_t width = 0;
    for (const auto& c : columns_) width += c.categorical ? c.categories.size() : 1;
    return width;
  }

  std::vector<std::string> output_names() const {
    std::vector<std::string> names;
    for (const auto& c : columns_) {
      if (!c.categorical) {
        names.push_back(c.name);
        continue;
      }
      for (const auto& cat : c.categories) names.push_back(c.name + "=" + cat);
    }
    return names;
  }

  // Rows are cells in the fitted column order. `first_line` is the file line
  // of rows[0], used only in diagnostics.
  Matrix apply(const std::vector<std::vector<std::string>>& rows, std::size_t first_line = 1) const {
    const std::size_t width = output_width();
    std::vector<double> values(rows.size() * width, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != columns_.size()) {
        throw ParseError("line " + std::to_string(first_line + i) + ": expected " +
                             std::to_string(columns_.size()) + " cells, found " +
                             std::to_string(rows[i].size()),
                         first_line + i);
      }
      std::size_t offset = 0;
      for (std::size_t c = 0; c < columns_.size(); ++c) {
        const auto& col = columns_[c];
        if (col.categorical) {
          const auto it = std::find(col.categories.begin(), col.categories.end(), rows[i][c]);
          if (it != col.categories.end()) {
            values[i * width + offset + static_cast<std::size_t>(it - col.categories.begin())] = 1.0;
          }
          offset += col.categories.size();
        } else {
          double x = 0.0;
          if (!parse_double(rows[i][c], x) || !std::isfinite(x)) {
            throw ParseError("line " + std::to_string(first_line + i) + ", column '" + col.name +
                                 "': not a number: '" + rows[i][c] + "'",
                             first_line + i);
          }
          values[i * width + offset] = x;
          offset += 1;
        }
      }
    }
    return auto_representation(DenseMatrix(rows.size(), width, std::move(values)));
  }

 private:
  std::vector<Column> columns_;
};

// N×k indicator matrix; CSR when 1/k is below the density threshold.
inline Matrix one_hot_targets(std::span<const std::size_t> labels, std::size_t k) {
  SparseBuilder builder(k, labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= k) {
      throw std::invalid_argument("one_hot_targets: class index " + std::to_string(labels[i]) +
                                  " out of range at row " + std::to_string(i));
    }
    builder.push(labels[i], 1.0);
    builder.end_row();
  }
  return auto_representation(Matrix(std::move(builder).finish()));
}

// ---------------------------------------------------------------------------
// Label hierarchies

class HierarchyGraph {
 public:
  HierarchyGraph() = default;

  // Edges are (parent, child) label indices. Throws std::invalid_argument with
  // one cycle witness when the graph is not acyclic.
  HierarchyGraph(std::vector<std::string> names,
                 const std::vector<std::pair<std::size_t, std::size_t>>& edges)
      : names_(std::move(names)), parents_(names_.size()), children_(names_.size()) {
    for (std::size_t i = 0; i < names_.size(); ++i) index_.emplace(names_[i], i);
    for (const auto& [parent, child] : edges) {
      if (parent >= names_.size() || child >= names_.size()) {
        throw std::invalid_argument("hierarchy: label index out of range");
      }
      if (parent == child) throw std::invalid_argument("hierarchy: cycle " + names_[parent] + " -> " + names_[parent]);
      auto& ps = parents_[child];
      if (std::find(ps.begin(), ps.end(), parent) != ps.end()) continue;
      ps.push_back(parent);
      children_[parent].push_back(child);
    }
    check_acyclic();
    compute_depths();
    compute_ancestors();
  }

  std::size_t label_count() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::size_t>& parents(std::size_t label) const { return parents_[label]; }
  const std::vector<std::size_t>& roots() const { return roots_; }
  std::size_t depth(std::size_t label) const { return depths_[label]; }
  // Strict ancestors, sorted ascending.
  const std::vector<std::size_t>& ancestors(std::size_t label) const { return ancestors_[label]; }

  std::optional<std::size_t> index_of(const std::string& name) const {
    const auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void check_acyclic() const {
    // 0 = unvisited, 1 = on stack, 2 = done.
    std::vector<int> state(names_.size(), 0);
    std::vector<std::size_t> path;
    for (std::size_t start = 0; start < names_.size(); ++start) {
      if (state[start] != 0) continue;
      // Iterative DFS over child edges; frames hold (node, next child slot).
      std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
      state[start] = 1;
      path.assign(1, start);
      while (!stack.empty()) {
        auto& [node, slot] = stack.back();
        if (slot == children_[node].size()) {
          state[node] = 2;
          stack.pop_back();
          path.pop_back();
          continue;
        }
        const std::size_t next = children_[node][slot++];
        if (state[next] == 1) {
          std::string witness;
          const auto from = std::find(path.begin(), path.end(), next);
          for (auto it = from; it != path.end(); ++it) witness += names_[*it] + " -> ";
          witness += names_[next];
          throw std::invalid_argument("hierarchy: cycle " + witness);
        }
        if (state[next] == 0) {
          state[next] = 1;
          path.push_back(next);
          stack.emplace_back(next, 0);
        }
      }
    }
  }

  void compute_depths() {
    constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
    depths_.assign(names_.size(), kUnset);
    std::deque<std::size_t> queue;
    for (std::size_t j = 0; j < names_.size(); ++j) {
      if (parents_[j].empty()) {
        roots_.push_back(j);
        depths_[j] = 0;
        queue.push_back(j);
      }
    }
    while (!queue.empty()) {
      const std::size_t node = queue.front();
      queue.pop_front();
      for (std::size_t child : children_[node]) {
        if (depths_[child] == kUnset) {
          depths_[child] = depths_[node] + 1;
          queue.push_back(child);
        }
      }
    }
  }

  void compute_ancestors() {
    ancestors_.assign(names_.size(), {});
    std::vector<std::uint8_t> seen(names_.size());
    for (std::size_t j = 0; j < names_.size(); ++j) {
      std::fill(seen.begin(), seen.end(), 0);
      std::vector<std::size_t> stack(parents_[j].begin(), parents_[j].end());
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        if (seen[a]) continue;
        seen[a] = 1;
        ancestors_[j].push_back(a);
        stack.insert(stack.end(), parents_[a].begin(), parents_[a].end());
      }
      std::sort(ancestors_[j].begin(), ancestors_[j].end());
    }
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::size_t> roots_;
  std::vector<std::size_t> depths_;
  std::vector<std::vector<std::size_t>> ancestors_;
};

// Ancestor closure of every example's label set. Keeps the representation.
inline Matrix expand_hierarchy(const Matrix& y, const HierarchyGraph& h) {
  if (y.cols() != h.label_count()) {
    throw std::invalid_argument("expand_hierarchy: label count does not match hierarchy");
  }
  std::vector<std::uint8_t> on(y.cols());
  SparseBuilder builder(y.cols(), y.nnz());
  for (std::size_t i = 0; i < y.rows(); ++i) {
    std::fill(on.begin(), on.end(), 0);
    y.for_each_in_row(i, [&](std::size_t j, double x) {
      if (x == 0.0) return;
      on[j] = 1;
      for (std::size_t a : h.ancestors(j)) on[a] = 1;
    });
    for (std::size_t j = 0; j < on.size(); ++j) {
      if (on[j]) builder.push(j, 1.0);
    }
    builder.end_row();
  }
  Matrix closed(std::move(builder).finish());
  if (y.is_sparse()) return closed;
  return to_dense(closed);
}

// base^depth per label; roots have depth 0.
inline Vector hierarchy_label_weights(const HierarchyGraph& h, double base = 0.75) {
  Vector w(h.label_count());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::pow(base, static_cast<double>(h.depth(j)));
  return w;
}

}  // namespace opct

#endif  // OPCT_PREPROCESS_HPP_
