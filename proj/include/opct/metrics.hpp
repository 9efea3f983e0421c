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

#ifndef OPCT_METRICS_HPP_
#define OPCT_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "opct/common.hpp"
#include "opct/matrix.hpp"
#include "opct/preprocess.hpp"

namespace opct {

// Returned by r2() when the truth has zero variance and the predictions are
// not exact. Treated as undefined by mean_r2().
inline constexpr double kUndefinedR2 = -std::numeric_limits<double>::infinity();

inline double r2(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("r2: length mismatch");
  if (y.size() < 2) throw std::invalid_argument("r2: need at least two values");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : kUndefinedR2;
  return 1.0 - ss_res / ss_tot;
}

struct MeanR2 {
  double value = 0.0;            // NaN when every column is undefined
  std::size_t undefined = 0;     // columns skipped
};

inline MeanR2 mean_r2(const Matrix& y, const Matrix& yhat) {
  if (y.rows() != yhat.rows() || y.cols() != yhat.cols()) throw std::invalid_argument("mean_r2: shape mismatch");
  const DenseMatrix yd = to_dense(y);
  const DenseMatrix pd = to_dense(yhat);
  MeanR2 out;
  double sum = 0.0;
  std::size_t used = 0;
  Vector col_y(y.rows()), col_p(y.rows());
  for (std::size_t j = 0; j < y.cols(); ++j) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      col_y[i] = yd(i, j);
      col_p[i] = pd(i, j);
    }
    const double v = r2(col_y, col_p);
    if (v == kUndefinedR2) {
      ++out.undefined;
      continue;
    }
    sum += v;
    ++used;
  }
  out.value = used == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(used);
  return out;
}

// 2·tp / (2·tp + fp + fn), 0 when the denominator is 0.
inline double f1_binary(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("f1_binary: length mismatch");
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool truth = y[i] != 0.0;
    const bool pred = yhat[i] != 0.0;
    tp += truth && pred;
    fp += !truth && pred;
    fn += truth && !pred;
  }
  const double denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2 * tp / denom;
}

// Unweighted mean of one-vs-rest F1 over all k classes.
inline double f1_macro(std::span<const std::size_t> y, std::span<const std::size_t> yhat, std::size_t k) {
  if (y.size() != yhat.size()) throw std::invalid_argument("f1_macro: length mismatch");
  if (k == 0) throw std::invalid_argument("f1_macro: no classes");
  std::vector<double> tp(k), fp(k), fn(k);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= k || yhat[i] >= k) throw std::invalid_argument("f1_macro: class index out of range");
    if (y[i] == yhat[i]) {
      tp[y[i]] += 1;
    } else {
      fn[y[i]] += 1;
      fp[yhat[i]] += 1;
    }
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double denom = 2 * tp[c] + fp[c] + fn[c];
    sum += denom == 0 ? 0.0 : 2 * tp[c] / denom;
  }
  return sum / static_cast<double>(k);
}

struct LrapResult {
  double value = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  // examples without positive labels
};

// Weighted label ranking average precision:
//   (1/n) Σ_i Σ_{j: y_ij = 1} (w_j / W_i) · L_ij / R_ij
// with L_ij = |{k : y_ik = 1, s_ik >= s_ij}| and R_ij = |{k : s_ik >= s_ij}|.
// Examples with no positive labels (or zero positive weight) are skipped and
// n counts only the evaluated ones.
inline LrapResult lrap_weighted(const Matrix& y, const Matrix& scores, std::span<const double> w) {
  if (y.rows() != scores.rows() || y.cols() != scores.cols() || w.size() != y.cols()) {
    throw std::invalid_argument("lrap_weighted: shape mismatch");
  }
  const std::size_t l = y.cols();
  LrapResult out;
  double total = 0.0;
  Vector s(l);
  std::vector<std::uint8_t> truth(l);
  std::vector<std::size_t> order(l);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    std::fill(s.begin(), s.end(), 0.0);
    std::fill(truth.begin(), truth.end(), 0);
    scores.for_each_in_row(i, [&](std::size_t j, double v) { s[j] = v; });
    y.for_each_in_row(i, [&](std::size_t j, double v) { truth[j] = v != 0.0; });
    double weight_sum = 0.0;
    for (std::size_t j = 0; j < l; ++j) {
      if (truth[j]) weight_sum += w[j];
    }
    if (!(weight_sum > 0.0)) {
      ++out.skipped;
      continue;
    }
    // Descending by score; a block of equal scores shares R and L, equal to
    // the counts up to and including the block.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    double example = 0.0;
    std::size_t rank = 0, true_rank = 0;
    for (std::size_t start = 0; start < l;) {
      std::size_t end = start;
      std::size_t block_true = 0;
      while (end < l && s[order[end]] == s[order[start]]) {
        block_true += truth[order[end]];
        ++end;
      }
      rank += end - start;
      true_rank += block_true;
      for (std::size_t q = start; q < end; ++q) {
        const std::size_t j = order[q];
        if (truth[j]) example += w[j] / weight_sum * static_cast<double>(true_rank) / static_cast<double>(rank);
      }
      start = end;
    }
    total += example;
    ++out.evaluated;
  }
  out.value = out.evaluated == 0 ? 0.0 : total / static_cast<double>(out.evaluated);
  return out;
}

// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < v.size(); ++j) {
    if (v[j] > v[best]) best = j;
  }
  return best;
}

inline std::vector<std::size_t> argmax_rows(const Matrix& m) {
  const DenseMatrix d = to_dense(m);
  std::vector<std::size_t> out(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) out[i] = argmax(d.row(i));
  return out;
}

struct EvalResult {
  std::string metric;  // r2, mean_r2, f1, macro_f1, lrap, weighted_lrap
  double value = 0.0;
  std::size_t skipped = 0;  // undefined R² columns or LRAP examples without labels
};

// Task-specific measure. BIN scores are thresholded at 0.5; MCC compares
// argmax rows; HMLC weights labels by 0.75^depth.
inline EvalResult evaluate(Task task, const Matrix& truth, const Matrix& scores,
                           const HierarchyGraph* hierarchy = nullptr) {
  if (truth.rows() != scores.rows() || truth.cols() != scores.cols()) {
    throw std::invalid_argument("evaluate: truth and scores have different shapes");
  }
  switch (task) {
    case Task::kStr: {
      const auto r = mean_r2(truth, scores);
      return {"r2", r.value, r.undefined};
    }
    case Task::kMtr: {
      const auto r = mean_r2(truth, scores);
      return {"mean_r2", r.value, r.undefined};
    }
    case Task::kBin: {
      Vector y(truth.rows()), yhat(truth.rows());
      for (std::size_t i = 0; i < truth.rows(); ++i) {
        y[i] = truth.at(i, 0);
        yhat[i] = scores.at(i, 0) >= 0.5 ? 1.0 : 0.0;
      }
      return {"f1", f1_binary(y, yhat), 0};
    }
    case Task::kMcc: {
      return {"macro_f1", f1_macro(argmax_rows(truth), argmax_rows(scores), truth.cols()), 0};
    }
    case Task::kMlc: {
      const Vector w(truth.cols(), 1.0);
      const auto r = lrap_weighted(truth, scores, w);
      return {"lrap", r.value, r.skipped};
    }
    case Task::kHmlc: {
      if (!hierarchy) throw std::invalid_argument("evaluate: hmlc needs a hierarchy");
      const auto r = lrap_weighted(truth, scores, hierarchy_label_weights(*hierarchy));
      return {"weighted_lrap", r.value, r.skipped};
    }
  }
  throw std::invalid_argument("evaluate: unknown task");
}

}  // namespace opct

#endif  // OPCT_METRICS_HPP_
