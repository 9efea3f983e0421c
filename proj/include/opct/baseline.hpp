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

// Axis-parallel predictive clustering tree: exhaustive single-feature
// threshold search inside the same induction shell as the oblique trees.
// Axis splits are stored as unit-vector hyperplanes (w = e_f, b = -t).

#ifndef OPCT_BASELINE_HPP_
#define OPCT_BASELINE_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "opct/matrix.hpp"
#include "opct/preprocess.hpp"
#include "opct/tree.hpp"

namespace opct {

struct AxisTest {
  std::size_t feature = 0;
  double threshold = 0.0;
  double score = 0.0;
};

// Candidate thresholds are midpoints between consecutive distinct values.
// score = n·imp(Z) − n1·imp(Z_left) − n2·imp(Z_right) with
// imp = Σ_j p_j var(Z_.j); since n·var_j = Σz² − (Σz)²/n this equals
// Σ_j p_j (L_j²/n1 + R_j²/n2 − T_j²/n) for column sums L, R, T.
// Ties go to the lower feature index, then the lower threshold.
inline std::optional<AxisTest> best_axis_test(const Matrix& x, const Matrix& z, std::span<const double> p,
                                              std::span<const std::size_t> features = {}) {
  if (x.rows() != z.rows()) throw std::invalid_argument("best_axis_test: row counts differ");
  if (p.size() != z.cols()) throw std::invalid_argument("best_axis_test: clustering weight count");
  const std::size_t n = x.rows();
  const std::size_t k = z.cols();
  if (n < 2) return std::nullopt;

  const DenseMatrix zd = to_dense(z);
  const DenseMatrix xd = to_dense(x);
  Vector total(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = zd.row(i);
    for (std::size_t j = 0; j < k; ++j) total[j] += r[j];
  }
  double parent_term = 0.0;
  for (std::size_t j = 0; j < k; ++j) parent_term += p[j] * total[j] * total[j];
  parent_term /= static_cast<double>(n);

  std::vector<std::size_t> all_features;
  if (features.empty()) {
    all_features.resize(x.cols());
    std::iota(all_features.begin(), all_features.end(), 0);
    features = all_features;
  }

  std::optional<AxisTest> best;
  std::vector<std::size_t> order(n);
  Vector left(k);
  for (std::size_t f : features) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xd(a, f) < xd(b, f); });
    std::fill(left.begin(), left.end(), 0.0);
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      const auto r = zd.row(order[pos]);
      for (std::size_t j = 0; j < k; ++j) left[j] += r[j];
      const double lo = xd(order[pos], f);
      const double hi = xd(order[pos + 1], f);
      if (!(lo < hi)) continue;
      const double n1 = static_cast<double>(pos + 1);
      const double n2 = static_cast<double>(n - pos - 1);
      double score = -parent_term;
      for (std::size_t j = 0; j < k; ++j) {
        const double right = total[j] - left[j];
        score += p[j] * (left[j] * left[j] / n1 + right * right / n2);
      }
      if (!best || score > best->score) best = AxisTest{f, lo + (hi - lo) / 2.0, score};
    }
  }
  return best;
}

inline Tree grow_axis_parallel(const Matrix& x, const Matrix& y, const Matrix& z, std::span<const double> p,
                               const GrowConfig& cfg) {
  return grow_with(x, y, z, p, cfg,
                   [](const Matrix& xn, const Matrix& zn, std::span<const double> pn, Rng&,
                      std::span<const std::size_t> subset) -> std::optional<Hyperplane> {
                     // Per-node scaling puts every clustering attribute on the
                     // same footing, as the oblique learners do.
                     const Matrix zs = apply_standardizer(fit_standardizer(zn, false), zn);
                     const auto test = best_axis_test(xn, zs, pn, subset);
                     if (!test) return std::nullopt;
                     Hyperplane plane{Vector(xn.cols(), 0.0), -test->threshold};
                     plane.w[test->feature] = 1.0;
                     return plane;
                   });
}

}  // namespace opct

#endif  // OPCT_BASELINE_HPP_
