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

// Oblique split learners.
//
// Two ways of finding a hyperplane x·w + b that separates a node's examples
// into groups with homogeneous clustering attributes Z:
//
//  * SVM variant: 2-means clustering of the rows of Z, then an L1-regularized
//    squared-hinge linear classifier that approximates the clustering in the
//    feature space.
//  * Gradient variant: sigmoid memberships s = σ(Xw + b) turn the
//    size-weighted impurity of both sides into a smooth function of (w, b),
//    which is minimized together with a smoothed L½ penalty using Adam.
//
// Both learners work on standardized inputs. learn_split() standardizes the
// node data and folds the scaling back so the returned plane acts on raw
// features.

#ifndef OPCT_SPLIT_HPP_
#define OPCT_SPLIT_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "opct/common.hpp"
#include "opct/matrix.hpp"
#include "opct/preprocess.hpp"

namespace opct {

struct Hyperplane {
  Vector w;
  double b = 0.0;

  double margin(const Matrix& x, std::size_t row) const { return row_dot(x, row, w) + b; }

  std::size_t nonzero_count() const {
    return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double v) { return v != 0.0; }));
  }

  friend bool operator==(const Hyperplane&, const Hyperplane&) = default;
};

// The numeric values are stored in model files.
enum class SplitVariant : std::uint8_t { kSvm = 0, kGrad = 1, kAxis = 2 };

inline std::string_view variant_name(SplitVariant v) {
  switch (v) {
    case SplitVariant::kSvm: return "svm";
    case SplitVariant::kGrad: return "grad";
    case SplitVariant::kAxis: return "axis";
  }
  return "unknown";
}

inline SplitVariant parse_variant(std::string_view name) {
  if (name == "svm") return SplitVariant::kSvm;
  if (name == "grad") return SplitVariant::kGrad;
  if (name == "axis") return SplitVariant::kAxis;
  throw std::invalid_argument("unknown split variant '" + std::string(name) + "'");
}

struct SvmSplitConfig {
  double C = 10.0;
  std::size_t max_cluster_iter = 10;
  std::size_t max_opt_iter = 100;
  double tol = 1e-4;
};

struct GradSplitConfig {
  double C = 10.0;
  double lr = 0.1;
  std::size_t max_opt_iter = 100;
  double tol = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double reg_smooth_eps = 1e-8;
};

struct SplitConfig {
  SplitVariant variant = SplitVariant::kGrad;
  SvmSplitConfig svm;
  GradSplitConfig grad;
};

// Objective value per optimizer iteration, and the running best.
struct OptimizationTrace {
  std::vector<double> objective;
  std::vector<double> best;

  void record(double value) {
    objective.push_back(value);
    best.push_back(best.empty() ? value : std::min(best.back(), value));
  }
};

// Relative objective change used for early stopping.
inline bool converged(double previous, double current, double tol) {
  const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
  return std::abs(previous - current) / scale < tol;
}

// ---------------------------------------------------------------------------
// 2-means clustering

struct ClusterAssignment {
  Vector labels;         // +1 / -1 per row
  Vector inertia;        // within-cluster sum of squares after each assignment step
  std::size_t iterations = 0;
};

namespace detail {

inline bool rows_equal(const Matrix& m, std::size_t a, std::size_t b) {
  if (m.is_sparse()) {
    const auto ra = m.sparse().row(a);
    const auto rb = m.sparse().row(b);
    return std::equal(ra.indices.begin(), ra.indices.end(), rb.indices.begin(), rb.indices.end()) &&
           std::equal(ra.values.begin(), ra.values.end(), rb.values.begin(), rb.values.end());
  }
  const auto ra = m.dense().row(a);
  const auto rb = m.dense().row(b);
  return std::equal(ra.begin(), ra.end(), rb.begin(), rb.end());
}

inline double row_norm_sq(const Matrix& m, std::size_t i) {
  Accumulator4 acc;
  m.for_each_in_row(i, [&](std::size_t j, double x) { acc.add(j, x * x); });
  return acc.sum();
}

inline double norm_sq(std::span<const double> v) {
  Accumulator4 acc;
  for (std::size_t j = 0; j < v.size(); ++j) acc.add(j, v[j] * v[j]);
  return acc.sum();
}

}  // namespace detail

// Lloyd iterations with Euclidean distance; centroids start at two distinct
// random rows. Returns nullopt when all rows are identical or one cluster
// ends up empty.
inline std::optional<ClusterAssignment> kmeans2(const Matrix& z, std::size_t max_iter, Rng& rng) {
  const std::size_t n = z.rows();
  if (n < 2) throw std::invalid_argument("kmeans2: need at least two rows");

  const std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
  if (pick >= first) ++pick;
  std::optional<std::size_t> second;
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t candidate = (pick + step) % n;
    if (candidate != first && !detail::rows_equal(z, first, candidate)) {
      second = candidate;
      break;
    }
  }
  if (!second) return std::nullopt;

  Vector centroid_pos(z.cols(), 0.0);
  Vector centroid_neg(z.cols(), 0.0);
  z.for_each_in_row(first, [&](std::size_t j, double x) { centroid_pos[j] = x; });
  z.for_each_in_row(*second, [&](std::size_t j, double x) { centroid_neg[j] = x; });

  Vector row_sq(n);
  for (std::size_t i = 0; i < n; ++i) row_sq[i] = detail::row_norm_sq(z, i);

  ClusterAssignment result;
  result.labels.assign(n, 0.0);
  Vector indicator(n);
  for (std::size_t it = 0; it < std::max<std::size_t>(max_iter, 1); ++it) {
    const double pos_sq = detail::norm_sq(centroid_pos);
    const double neg_sq = detail::norm_sq(centroid_neg);
    bool changed = false;
    double inertia = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d_pos = std::max(0.0, row_sq[i] - 2.0 * row_dot(z, i, centroid_pos) + pos_sq);
      const double d_neg = std::max(0.0, row_sq[i] - 2.0 * row_dot(z, i, centroid_neg) + neg_sq);
      const double label = d_pos <= d_neg ? 1.0 : -1.0;
      inertia += std::min(d_pos, d_neg);
      changed |= label != result.labels[i];
      result.labels[i] = label;
      n_pos += label > 0 ? 1 : 0;
    }
    result.inertia.push_back(inertia);
    result.iterations = it + 1;
    if (!changed) break;

    const std::size_t n_neg = n - n_pos;
    if (n_pos > 0) {
      for (std::size_t i = 0; i < n; ++i) indicator[i] = result.labels[i] > 0 ? 1.0 : 0.0;
      centroid_pos = matvec_transposed(z, indicator);
      for (double& c : centroid_pos) c /= static_cast<double>(n_pos);
    }
    if (n_neg > 0) {
      for (std::size_t i = 0; i < n; ++i) indicator[i] = result.labels[i] < 0 ? 1.0 : 0.0;
      centroid_neg = matvec_transposed(z, indicator);
      for (double& c : centroid_neg) c /= static_cast<double>(n_neg);
    }
  }
  const auto positives = std::count(result.labels.begin(), result.labels.end(), 1.0);
  if (positives == 0 || static_cast<std::size_t>(positives) == n) return std::nullopt;
  return result;
}

// ---------------------------------------------------------------------------
// L1-regularized squared-hinge linear classifier

namespace detail {

// Column-major copy of the feature matrix for coordinate descent. Dense
// matrices keep every entry; CSR matrices become CSC.
class ColumnStore {
 public:
  explicit ColumnStore(const Matrix& m) : rows_(m.rows()), cols_(m.cols()), dense_(!m.is_sparse()) {
    if (dense_) {
      values_.resize(rows_ * cols_);
      const auto& d = m.dense();
      for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) values_[j * rows_ + i] = d(i, j);
      }
      return;
    }
    const auto& s = m.sparse();
    offsets_.assign(cols_ + 1, 0);
    for (std::size_t j : s.col_indices()) ++offsets_[j + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    row_index_.resize(s.nnz());
    values_.resize(s.nnz());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
      const auto r = s.row(i);
      for (std::size_t k = 0; k < r.indices.size(); ++k) {
        const std::size_t slot = cursor[r.indices[k]]++;
        row_index_[slot] = i;
        values_[slot] = r.values[k];
      }
    }
  }

  template <typename F>
  void for_each_in_col(std::size_t j, F&& f) const {
    if (dense_) {
      const double* col = values_.data() + j * rows_;
      for (std::size_t i = 0; i < rows_; ++i) f(i, col[i]);
      return;
    }
    for (std::size_t k = offsets_[j]; k < offsets_[j + 1]; ++k) f(row_index_[k], values_[k]);
  }

  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  bool dense_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> row_index_;
  std::vector<double> values_;
};

}  // namespace detail

// ‖w‖₁ + C Σ max(0, 1 − c_i (x_i·w + b))².
inline double svc_objective(const Matrix& x, std::span<const double> labels, const Hyperplane& h, double c) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double slack = std::max(0.0, 1.0 - labels[i] * h.margin(x, i));
    loss += slack * slack;
  }
  double l1 = 0.0;
  for (double v : h.w) l1 += std::abs(v);
  return l1 + c * loss;
}

// Cyclic coordinate descent with a Newton step and Armijo backtracking per
// coordinate; the bias is an unregularized extra coordinate. Every accepted
// step decreases the objective, so the per-sweep objective never increases.
inline Hyperplane fit_svc(const Matrix& x, std::span<const double> labels, const SvmSplitConfig& cfg,
                          OptimizationTrace* trace = nullptr) {
  if (labels.size() != x.rows()) throw std::invalid_argument("fit_svc: label count does not match rows");
  constexpr double kSigma = 0.01;
  constexpr int kMaxLineSearch = 20;
  const std::size_t n = x.rows();
  const double c = cfg.C;
  const detail::ColumnStore columns(x);

  Hyperplane h{Vector(x.cols(), 0.0), 0.0};
  // slack_i = 1 − c_i (x_i·w + b)
  Vector slack(n, 1.0);
  auto objective = [&] {
    double loss = 0.0;
    for (double s : slack) {
      if (s > 0.0) loss += s * s;
    }
    double l1 = 0.0;
    for (double v : h.w) l1 += std::abs(v);
    return l1 + c * loss;
  };

  double previous = objective();
  if (trace) trace->record(previous);
  for (std::size_t sweep = 0; sweep < cfg.max_opt_iter; ++sweep) {
    for (std::size_t j = 0; j < columns.cols(); ++j) {
      double grad = 0.0;
      double hess = 0.0;
      columns.for_each_in_col(j, [&](std::size_t i, double v) {
        if (slack[i] > 0.0) {
          grad += labels[i] * v * slack[i];
          hess += v * v;
        }
      });
      grad *= -2.0 * c;
      hess = std::max(2.0 * c * hess, 1e-12);

      const double wj = h.w[j];
      const double grad_plus = grad + 1.0;
      const double grad_minus = grad - 1.0;
      double d;
      if (grad_plus < hess * wj) {
        d = -grad_plus / hess;
      } else if (grad_minus > hess * wj) {
        d = -grad_minus / hess;
      } else {
        d = -wj;
      }
      if (std::abs(d) < 1e-12) continue;

      double delta = grad * d + std::abs(wj + d) - std::abs(wj);
      for (int step = 0; step < kMaxLineSearch; ++step) {
        double loss_change = 0.0;
        columns.for_each_in_col(j, [&](std::size_t i, double v) {
          const double before = std::max(0.0, slack[i]);
          const double after = std::max(0.0, slack[i] - d * labels[i] * v);
          loss_change += after * after - before * before;
        });
        const double change = std::abs(wj + d) - std::abs(wj) + c * loss_change;
        if (change <= kSigma * delta && change <= 0.0) {
          columns.for_each_in_col(j, [&](std::size_t i, double v) { slack[i] -= d * labels[i] * v; });
          h.w[j] = wj + d;
          break;
        }
        d *= 0.5;
        delta *= 0.5;
      }
    }

    {
      double grad = 0.0;
      double active = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (slack[i] > 0.0) {
          grad += labels[i] * slack[i];
          active += 1.0;
        }
      }
      grad *= -2.0 * c;
      const double hess = std::max(2.0 * c * active, 1e-12);
      double d = -grad / hess;
      double delta = grad * d;
      for (int step = 0; step < kMaxLineSearch && std::abs(d) >= 1e-12; ++step) {
        double loss_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double before = std::max(0.0, slack[i]);
          const double after = std::max(0.0, slack[i] - d * labels[i]);
          loss_change += after * after - before * before;
        }
        const double change = c * loss_change;
        if (change <= kSigma * delta && change <= 0.0) {
          for (std::size_t i = 0; i < n; ++i) slack[i] -= d * labels[i];
          h.b += d;
          break;
        }
        d *= 0.5;
        delta *= 0.5;
      }
    }

    const double current = objective();
    if (trace) trace->record(current);
    const bool done = converged(previous, current, cfg.tol);
    previous = current;
    if (done) break;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Fuzzy impurity and split fitness

// Σ_j p_j var(Z_.j, s).
inline double fuzzy_impurity(const Matrix& z, std::span<const double> p, std::span<const double> s) {
  if (p.size() != z.cols()) throw std::invalid_argument("fuzzy_impurity: weight count does not match columns");
  const Vector var = weighted_colvar(z, s);
  double total = 0.0;
  for (std::size_t j = 0; j < var.size(); ++j) total += p[j] * var[j];
  return total;
}

inline double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

// S·imp(Z, p, s) + (N − S)·imp(Z, p, 1 − s) with s = σ(Xw + b). A side whose
// membership mass is zero contributes nothing.
inline double split_fitness(const Hyperplane& h, const Matrix& x, const Matrix& z, std::span<const double> p) {
  if (x.rows() != z.rows() || h.w.size() != x.cols()) {
    throw std::invalid_argument("split_fitness: dimension mismatch");
  }
  const std::size_t n = x.rows();
  Vector s = matvec(x, h.w);
  Vector rest(n);
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = sigmoid(s[i] + h.b);
    rest[i] = 1.0 - s[i];
    mass += s[i];
  }
  const double rest_mass = static_cast<double>(n) - mass;
  double f = 0.0;
  if (mass > 0.0) f += mass * fuzzy_impurity(z, p, s);
  if (rest_mass > 0.0) f += rest_mass * fuzzy_impurity(z, p, rest);
  return f;
}

struct FitnessGradient {
  Vector dw;
  double db = 0.0;
};

namespace detail {

// Evaluates the split fitness and its gradient in O(nnz(X) + nnz(Z)).
//
// With B = Zᵀs, T = Zᵀ1, Q_j = Σ_i z_ij² and S = Σs the fitness reduces to
//   f = Σ_j p_j (Q_j − B_j²/S − (T_j − B_j)²/(N − S)),
// so ∂f/∂s_i = −2 Σ_j z_ij p_j (μ⁺_j − μ⁻_j) + Σ_j p_j (μ⁺_j² − μ⁻_j²)
// where μ⁺ = B/S and μ⁻ = (T − B)/(N − S) are the fuzzy side means.
class FitnessEvaluator {
 public:
  FitnessEvaluator(const Matrix& x, const Matrix& z, std::span<const double> p) : x_(x), z_(z), p_(p) {
    if (x.rows() != z.rows() || p.size() != z.cols()) {
      throw std::invalid_argument("split fitness: dimension mismatch");
    }
    const Vector ones(z.rows(), 1.0);
    auto [t, q] = weighted_colsums(z, ones);
    totals_ = std::move(t);
    constant_ = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) constant_ += p_[j] * q[j];
  }

  double evaluate(const Hyperplane& h, FitnessGradient* grad) const {
    const std::size_t n = x_.rows();
    Vector s = matvec(x_, h.w);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = sigmoid(s[i] + h.b);
      mass += s[i];
    }
    const double rest_mass = static_cast<double>(n) - mass;
    const Vector pos_sum = matvec_transposed(z_, s);

    double f = constant_;
    double shift = 0.0;
    Vector direction(z_.cols());
    for (std::size_t j = 0; j < direction.size(); ++j) {
      const double mean_pos = mass > 0.0 ? pos_sum[j] / mass : 0.0;
      const double neg_sum = totals_[j] - pos_sum[j];
      const double mean_neg = rest_mass > 0.0 ? neg_sum / rest_mass : 0.0;
      f -= p_[j] * (mean_pos * pos_sum[j] + mean_neg * neg_sum);
      direction[j] = p_[j] * (mean_pos - mean_neg);
      shift += p_[j] * (mean_pos * mean_pos - mean_neg * mean_neg);
    }
    if (!grad) return f;

    Vector g = matvec(z_, direction);
    double db = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = (shift - 2.0 * g[i]) * s[i] * (1.0 - s[i]);
      db += g[i];
    }
    grad->dw = matvec_transposed(x_, g);
    grad->db = db;
    return f;
  }

 private:
  const Matrix& x_;
  const Matrix& z_;
  std::span<const double> p_;
  Vector totals_;
  double constant_ = 0.0;
};

}  // namespace detail

// Analytic gradient of split_fitness with respect to (w, b).
inline FitnessGradient grad_split_fitness(const Hyperplane& h, const Matrix& x, const Matrix& z,
                                          std::span<const double> p) {
  if (h.w.size() != x.cols()) throw std::invalid_argument("grad_split_fitness: dimension mismatch");
  FitnessGradient grad;
  detail::FitnessEvaluator(x, z, p).evaluate(h, &grad);
  return grad;
}

// (Σ_i √(|w_i| + ε))², a differentiable stand-in for the L½ quasi-norm.
inline double smoothed_l_half(std::span<const double> w, double eps) {
  double root_sum = 0.0;
  for (double v : w) root_sum += std::sqrt(std::abs(v) + eps);
  return root_sum * root_sum;
}

inline Vector smoothed_l_half_grad(std::span<const double> w, double eps) {
  double root_sum = 0.0;
  for (double v : w) root_sum += std::sqrt(std::abs(v) + eps);
  Vector g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double sign = w[i] > 0.0 ? 1.0 : (w[i] < 0.0 ? -1.0 : 0.0);
    g[i] = root_sum * sign / std::sqrt(std::abs(w[i]) + eps);
  }
  return g;
}

// reg(w) + C·f(w, b).
inline double grad_split_objective(const Hyperplane& h, const Matrix& x, const Matrix& z,
                                   std::span<const double> p, const GradSplitConfig& cfg) {
  return smoothed_l_half(h.w, cfg.reg_smooth_eps) + cfg.C * split_fitness(h, x, z, p);
}

// Zeroes weights below 1e-4·max|w|.
inline void truncate_small_weights(Vector& w) {
  double largest = 0.0;
  for (double v : w) largest = std::max(largest, std::abs(v));
  const double threshold = 1e-4 * largest;
  for (double& v : w) {
    if (std::abs(v) < threshold) v = 0.0;
  }
}

inline double median(Vector values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2.0;
}

// Adam on reg(w) + C·f(w, b). w starts as N(0, 1/D) and b puts the median
// example on the plane. The best iterate seen is returned, with small
// weights truncated to exact zeros.
inline Hyperplane fit_grad_split(const Matrix& x, const Matrix& z, std::span<const double> p,
                                 const GradSplitConfig& cfg, Rng& rng, OptimizationTrace* trace = nullptr) {
  const std::size_t d = x.cols();
  const detail::FitnessEvaluator fitness(x, z, p);

  Hyperplane h{Vector(d), 0.0};
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1)));
  for (double& v : h.w) v = normal(rng) * scale;
  h.b = -median(matvec(x, h.w));

  Vector m_w(d, 0.0), v_w(d, 0.0);
  double m_b = 0.0, v_b = 0.0;
  double beta1_t = 1.0, beta2_t = 1.0;

  Hyperplane best = h;
  double best_objective = std::numeric_limits<double>::infinity();
  double previous = 0.0;
  FitnessGradient grad;
  for (std::size_t it = 0; it < cfg.max_opt_iter; ++it) {
    const double f = fitness.evaluate(h, &grad);
    const double objective = smoothed_l_half(h.w, cfg.reg_smooth_eps) + cfg.C * f;
    if (trace) trace->record(objective);
    if (objective < best_objective) {
      best_objective = objective;
      best = h;
    }
    if (it > 0 && converged(previous, objective, cfg.tol)) break;
    previous = objective;

    const Vector reg_grad = smoothed_l_half_grad(h.w, cfg.reg_smooth_eps);
    beta1_t *= cfg.adam_beta1;
    beta2_t *= cfg.adam_beta2;
    const double step = cfg.lr / (1.0 - beta1_t);
    const double v_correction = 1.0 - beta2_t;
    for (std::size_t i = 0; i < d; ++i) {
      const double g = reg_grad[i] + cfg.C * grad.dw[i];
      m_w[i] = cfg.adam_beta1 * m_w[i] + (1.0 - cfg.adam_beta1) * g;
      v_w[i] = cfg.adam_beta2 * v_w[i] + (1.0 - cfg.adam_beta2) * g * g;
      h.w[i] -= step * m_w[i] / (std::sqrt(v_w[i] / v_correction) + cfg.adam_eps);
    }
    const double g = cfg.C * grad.db;
    m_b = cfg.adam_beta1 * m_b + (1.0 - cfg.adam_beta1) * g;
    v_b = cfg.adam_beta2 * v_b + (1.0 - cfg.adam_beta2) * g * g;
    h.b -= step * m_b / (std::sqrt(v_b / v_correction) + cfg.adam_eps);
  }
  truncate_small_weights(best.w);
  return best;
}

// ---------------------------------------------------------------------------
// Node-level entry point

namespace detail {

// Scale-only for matrices below the sparse density threshold, center-and-scale
// otherwise. Deciding by content rather than storage keeps dense and CSR
// copies of the same data on one numeric path.
inline bool should_center(const Matrix& m) { return m.density() >= kSparseDensityThreshold; }

}  // namespace detail

// Standardizes the node's X and Z, runs the chosen learner on the candidate
// feature columns (all columns when `feature_subset` is empty) and returns
// the plane in raw feature coordinates. Columns outside the subset, and
// columns constant within the node, get weight 0. Returns nullopt when there
// is nothing to separate.
inline std::optional<Hyperplane> learn_split(const SplitConfig& cfg, const Matrix& x, const Matrix& z,
                                             std::span<const double> p, Rng& rng,
                                             std::span<const std::size_t> feature_subset = {}) {
  if (x.rows() != z.rows()) throw std::invalid_argument("learn_split: row counts differ");
  if (p.size() != z.cols()) throw std::invalid_argument("learn_split: clustering weight count");
  if (cfg.variant == SplitVariant::kAxis) throw std::invalid_argument("learn_split: axis splits live in baseline.hpp");
  if (x.rows() < 2) return std::nullopt;

  const auto [x_means, x_vars] = colmoments(x);
  std::vector<std::size_t> active;
  auto consider = [&](std::size_t j) {
    if (std::sqrt(x_vars[j]) >= kMinStd) active.push_back(j);
  };
  if (feature_subset.empty()) {
    for (std::size_t j = 0; j < x.cols(); ++j) consider(j);
  } else {
    for (std::size_t j : feature_subset) consider(j);
  }
  if (active.empty()) return std::nullopt;

  const Matrix x_active = active.size() == x.cols() ? x : take_cols(x, active);
  const Standardizer x_scale = fit_standardizer(x_active, detail::should_center(x_active));
  const Matrix xs = apply_standardizer(x_scale, x_active);

  const Standardizer z_scale = fit_standardizer(z, detail::should_center(z));
  const auto [z_means, z_vars] = colmoments(z);
  const bool z_varies = std::any_of(z_vars.begin(), z_vars.end(), [](double v) { return std::sqrt(v) >= kMinStd; });
  if (!z_varies) return std::nullopt;
  const Matrix zs = apply_standardizer(z_scale, z);

  Hyperplane local;
  if (cfg.variant == SplitVariant::kSvm) {
    const auto clusters = kmeans2(zs, cfg.svm.max_cluster_iter, rng);
    if (!clusters) return std::nullopt;
    local = fit_svc(xs, clusters->labels, cfg.svm);
  } else {
    local = fit_grad_split(xs, zs, p, cfg.grad, rng);
  }

  Hyperplane plane{Vector(x.cols(), 0.0), local.b};
  for (std::size_t k = 0; k < active.size(); ++k) {
    const double w = local.w[k] / x_scale.stds[k];
    plane.w[active[k]] = w;
    if (!x_scale.sparse_mode) plane.b -= w * x_scale.means[k];
  }
  if (plane.nonzero_count() == 0) return std::nullopt;
  return plane;
}

}  // namespace opct

#endif  // OPCT_SPLIT_HPP_
