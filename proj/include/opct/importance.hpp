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

// Feature importance from split weights, and the noise-feature audit.

#ifndef OPCT_IMPORTANCE_HPP_
#define OPCT_IMPORTANCE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "opct/common.hpp"
#include "opct/data.hpp"
#include "opct/ensemble.hpp"
#include "opct/matrix.hpp"
#include "opct/tree.hpp"

namespace opct {

// Σ over split nodes of (n_node / N) · |w| / ‖w‖₁, with w in
// node-standardized units when the node records them.
inline Vector tree_importance(const Tree& tree) {
  Vector imp(tree.n_features, 0.0);
  if (tree.total_training_examples == 0) return imp;
  const double total = static_cast<double>(tree.total_training_examples);
  for (const auto& node : tree.nodes) {
    if (node.is_leaf) continue;
    const Vector& w = node.standardized_w.empty() ? node.plane.w : node.standardized_w;
    double l1 = 0.0;
    for (double v : w) l1 += std::abs(v);
    if (l1 == 0.0) continue;
    const double share = static_cast<double>(node.n_examples) / total;
    for (std::size_t j = 0; j < imp.size(); ++j) imp[j] += share * std::abs(w[j]) / l1;
  }
  return imp;
}

inline Vector ensemble_importance(const EnsembleModel& model) {
  Vector imp(model.n_features, 0.0);
  if (model.trees.empty()) return imp;
  for (const auto& tree : model.trees) {
    const Vector t = tree_importance(tree);
    for (std::size_t j = 0; j < imp.size(); ++j) imp[j] += t[j];
  }
  for (double& v : imp) v /= static_cast<double>(model.trees.size());
  return imp;
}

// Appends x.cols() noise columns. Dense input gets uniform [0,1) values.
// Sparse input gets, for each original column, a noise column with the same
// number of nonzeros at uniformly chosen rows, valued uniform on (0,1].
inline Matrix append_noise_features(const Matrix& x, Rng& rng) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (!x.is_sparse()) {
    const DenseMatrix& src = x.dense();
    DenseMatrix out(n, 2 * d);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = src.row(i);
      std::copy(r.begin(), r.end(), out.row(i).begin());
    }
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) out(i, d + j) = unit(rng);
    }
    return out;
  }
  std::vector<std::size_t> col_nnz(d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    x.for_each_in_row(i, [&](std::size_t j, double) { ++col_nnz[j]; });
  }
  // noise[i] lists (column, value) pairs of row i, filled column by column so
  // each row's entries come out sorted.
  std::vector<std::vector<std::pair<std::size_t, double>>> noise(n);
  std::vector<std::size_t> rows(n);
  for (std::size_t j = 0; j < d; ++j) {
    std::iota(rows.begin(), rows.end(), 0);
    for (std::size_t k = 0; k < col_nnz[j]; ++k) {
      const std::size_t pick = std::uniform_int_distribution<std::size_t>(k, n - 1)(rng);
      std::swap(rows[k], rows[pick]);
      noise[rows[k]].emplace_back(d + j, 1.0 - unit(rng));
    }
  }
  SparseBuilder builder(2 * d);
  for (std::size_t i = 0; i < n; ++i) {
    x.for_each_in_row(i, [&](std::size_t j, double v) { builder.push(j, v); });
    for (const auto& [j, v] : noise[i]) builder.push(j, v);
    builder.end_row();
  }
  return std::move(builder).finish();
}

struct NoiseAuditReport {
  Vector importance;           // length 2·D, real columns first
  std::vector<bool> is_noise;
  double real_mean = 0.0;
  double real_max = 0.0;
  double noise_mean = 0.0;
  double noise_max = 0.0;
};

inline NoiseAuditReport summarize_importance(Vector importance, std::vector<bool> is_noise) {
  if (importance.size() != is_noise.size()) throw std::invalid_argument("summarize_importance: length mismatch");
  NoiseAuditReport r;
  std::size_t n_real = 0, n_noise = 0;
  for (std::size_t j = 0; j < importance.size(); ++j) {
    if (is_noise[j]) {
      r.noise_mean += importance[j];
      r.noise_max = std::max(r.noise_max, importance[j]);
      ++n_noise;
    } else {
      r.real_mean += importance[j];
      r.real_max = std::max(r.real_max, importance[j]);
      ++n_real;
    }
  }
  if (n_real > 0) r.real_mean /= static_cast<double>(n_real);
  if (n_noise > 0) r.noise_mean /= static_cast<double>(n_noise);
  r.importance = std::move(importance);
  r.is_noise = std::move(is_noise);
  return r;
}

// Appends one noise column per feature, trains the configured ensemble on the
// augmented data and reports importances by group.
inline NoiseAuditReport noise_audit(const Dataset& ds, const EnsembleConfig& cfg, Rng& rng) {
  if (ds.x.cols() == 0) throw std::invalid_argument("noise_audit: dataset has no features");
  Dataset augmented = ds;
  augmented.x = append_noise_features(ds.x, rng);
  augmented.encoder = FeatureEncoder();
  const EnsembleModel model = fit_ensemble(augmented, cfg);
  std::vector<bool> is_noise(2 * ds.x.cols(), false);
  std::fill(is_noise.begin() + static_cast<std::ptrdiff_t>(ds.x.cols()), is_noise.end(), true);
  return summarize_importance(ensemble_importance(model), std::move(is_noise));
}

// `feature_id,group,importance` rows, groups real|noise.
inline void write_importance_csv(std::ostream& out, const NoiseAuditReport& r) {
  out << "feature_id,group,importance\n";
  for (std::size_t j = 0; j < r.importance.size(); ++j) {
    out << j << ',' << (r.is_noise[j] ? "noise" : "real") << ',' << format_double(r.importance[j]) << '\n';
  }
}

}  // namespace opct

#endif  // OPCT_IMPORTANCE_HPP_
