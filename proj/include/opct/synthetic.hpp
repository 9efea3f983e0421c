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

// Seeded synthetic datasets for tests, benchmarks and demos.

#ifndef OPCT_SYNTHETIC_HPP_
#define OPCT_SYNTHETIC_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "opct/common.hpp"
#include "opct/data.hpp"
#include "opct/matrix.hpp"
#include "opct/preprocess.hpp"

namespace opct::synthetic {

// Points uniform on the unit square, labelled x1 + x2 >= 1, keeping only
// points with |x1 + x2 - 1| >= margin.
inline Dataset oblique_toy(std::size_t n, std::uint64_t seed, double margin = 0.1) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> x, y;
  while (y.size() < n) {
    const double a = unit(rng);
    const double b = unit(rng);
    if (std::abs(a + b - 1.0) < margin) continue;
    x.push_back(a);
    x.push_back(b);
    y.push_back(a + b >= 1.0 ? 1.0 : 0.0);
  }
  return make_dataset(DenseMatrix(n, 2, std::move(x)), DenseMatrix(n, 1, std::move(y)), Task::kBin);
}

namespace detail {

inline DenseMatrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = g(rng);
  return m;
}

// Random directions restricted to the first `informative` features.
inline DenseMatrix directions(std::size_t d, std::size_t k, std::size_t informative, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  DenseMatrix w(d, k, 0.0);
  for (std::size_t j = 0; j < std::min(d, informative); ++j) {
    for (std::size_t t = 0; t < k; ++t) w(j, t) = g(rng);
  }
  return w;
}

// N×K matrix x·w.
inline DenseMatrix project(const DenseMatrix& x, const DenseMatrix& w) {
  DenseMatrix out(x.rows(), w.cols(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      if (v == 0.0) continue;
      for (std::size_t t = 0; t < w.cols(); ++t) out(i, t) += v * w(j, t);
    }
  }
  return out;
}

}  // namespace detail

// Linear multi-target regression y = x·W + noise, with W drawn over all D
// features. Used by the scaling benchmark.
inline Dataset linear_mtr(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  DenseMatrix x = detail::gaussian(n, d, rng);
  const DenseMatrix w = detail::directions(d, k, d, rng);
  DenseMatrix y = detail::project(x, w);
  std::normal_distribution<double> g(0.0, noise);
  for (double& v : y.values()) v += g(rng);
  return make_dataset(std::move(x), std::move(y), Task::kMtr);
}

// Non-linear regression over `informative` of the d features:
// y_t = tanh(x·w_t) + 0.5·sin(x·v_t) + noise.
inline Dataset nonlinear_regression(std::size_t n, std::size_t d, std::size_t k, std::size_t informative,
                                    std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  DenseMatrix x = detail::gaussian(n, d, rng);
  const DenseMatrix a = detail::project(x, detail::directions(d, k, informative, rng));
  const DenseMatrix b = detail::project(x, detail::directions(d, k, informative, rng));
  std::normal_distribution<double> g(0.0, noise);
  DenseMatrix y(n, k);
  for (std::size_t i = 0; i < y.values().size(); ++i) {
    y.values()[i] = std::tanh(a.values()[i]) + 0.5 * std::sin(b.values()[i]) + g(rng);
  }
  return make_dataset(std::move(x), std::move(y), k == 1 ? Task::kStr : Task::kMtr);
}

// Binary labels from the sign of a noisy linear score plus an interaction.
inline Dataset binary_classification(std::size_t n, std::size_t d, std::size_t informative, std::uint64_t seed,
                                     double noise = 0.3) {
  Rng rng(seed);
  DenseMatrix x = detail::gaussian(n, d, rng);
  const DenseMatrix s = detail::project(x, detail::directions(d, 1, informative, rng));
  std::normal_distribution<double> g(0.0, noise);
  DenseMatrix y(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double inter = informative >= 2 ? 0.5 * x(i, 0) * x(i, 1) : 0.0;
    y(i, 0) = s(i, 0) + inter + g(rng) >= 0.0 ? 1.0 : 0.0;
  }
  return make_dataset(std::move(x), std::move(y), Task::kBin);
}

// Class = argmax of `classes` noisy linear scores.
inline Dataset multiclass(std::size_t n, std::size_t d, std::size_t classes, std::size_t informative,
                          std::uint64_t seed, double noise = 0.3) {
  Rng rng(seed);
  DenseMatrix x = detail::gaussian(n, d, rng);
  DenseMatrix s = detail::project(x, detail::directions(d, classes, informative, rng));
  std::normal_distribution<double> g(0.0, noise);
  for (double& v : s.values()) v += g(rng);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c) {
      if (s(i, c) > s(i, best)) best = c;
    }
    labels[i] = best;
  }
  return make_dataset(std::move(x), one_hot_targets(labels, classes), Task::kMcc);
}

// Label t present when its noisy linear score exceeds 0.
inline Dataset multilabel(std::size_t n, std::size_t d, std::size_t labels, std::size_t informative,
                          std::uint64_t seed, double noise = 0.3) {
  Rng rng(seed);
  DenseMatrix x = detail::gaussian(n, d, rng);
  DenseMatrix s = detail::project(x, detail::directions(d, labels, informative, rng));
  std::normal_distribution<double> g(0.0, noise);
  for (double& v : s.values()) v = v + g(rng) >= 0.0 ? 1.0 : 0.0;
  return make_dataset(std::move(x), auto_representation(s), Task::kMlc);
}

// Each entry nonzero with probability `density`, value uniform on [0.5, 1.5);
// y = x·W + noise with W over all features.
inline Dataset sparse_regression(std::size_t n, std::size_t d, std::size_t k, double density, std::uint64_t seed,
                                 double noise = 0.05) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SparseBuilder builder(d);
  DenseMatrix xd(n, d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (unit(rng) >= density) continue;
      const double v = 0.5 + unit(rng);
      builder.push(j, v);
      xd(i, j) = v;
    }
    builder.end_row();
  }
  DenseMatrix y = detail::project(xd, detail::directions(d, k, d, rng));
  std::normal_distribution<double> g(0.0, noise);
  for (double& v : y.values()) v += g(rng);
  return make_dataset(std::move(builder).finish(), std::move(y), k == 1 ? Task::kStr : Task::kMtr);
}

}  // namespace opct::synthetic

#endif  // OPCT_SYNTHETIC_HPP_
