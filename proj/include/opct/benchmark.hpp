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

// Timing harness comparing split learners across target and feature counts.

#ifndef OPCT_BENCHMARK_HPP_
#define OPCT_BENCHMARK_HPP_

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "opct/baseline.hpp"
#include "opct/common.hpp"
#include "opct/split.hpp"
#include "opct/synthetic.hpp"
#include "opct/tree.hpp"

namespace opct::bench {

struct ScalingOptions {
  std::size_t n = 2000;
  std::size_t d = 50;
  std::vector<std::size_t> k_values{10, 100, 1000};
  std::vector<std::size_t> d_values{10, 100, 1000};  // D sweep at k_for_d_sweep
  std::size_t k_for_d_sweep = 10;
  std::size_t sparse_d = 1000;  // dense-vs-CSR rows, 95% zeros
  double sparse_density = 0.05;
  std::size_t repeats = 3;  // the median is reported
  bool full_trees = true;
  std::vector<SplitVariant> variants{SplitVariant::kSvm, SplitVariant::kGrad, SplitVariant::kAxis};
  std::uint64_t seed = 1;
};

struct TimingRow {
  SplitVariant variant = SplitVariant::kGrad;
  std::string stage;  // "split" for one root split, "tree" for a full tree
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  bool sparse = false;
  double seconds = 0.0;
  std::size_t nodes = 0;
};

template <typename F>
double median_seconds(std::size_t repeats, F&& work) {
  std::vector<double> times;
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    const auto start = std::chrono::steady_clock::now();
    work();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

// Seconds to learn the root split of `ds`, median over `repeats`.
inline double time_root_split(SplitVariant variant, const Dataset& ds, std::size_t repeats, std::uint64_t seed) {
  SplitConfig cfg;
  cfg.variant = variant;
  return median_seconds(repeats, [&] {
    if (variant == SplitVariant::kAxis) {
      static_cast<void>(best_axis_test(ds.x, ds.z, ds.p));
    } else {
      Rng rng(seed);
      static_cast<void>(learn_split(cfg, ds.x, ds.z, ds.p, rng));
    }
  });
}

inline TimingRow time_tree(SplitVariant variant, const Dataset& ds, std::size_t repeats, std::uint64_t seed) {
  GrowConfig cfg;
  cfg.split.variant = variant;
  cfg.task = ds.task;
  cfg.seed = seed;
  std::size_t nodes = 0;
  const double s = median_seconds(repeats, [&] {
    const Tree t = variant == SplitVariant::kAxis ? grow_axis_parallel(ds.x, ds.y, ds.z, ds.p, cfg)
                                                  : grow(ds.x, ds.y, ds.z, ds.p, cfg);
    nodes = node_count(t);
  });
  return {variant, "tree", ds.rows(), ds.x.cols(), ds.y.cols(), ds.x.is_sparse(), s, nodes};
}

// Runs the K sweep, the D sweep and the dense-vs-CSR comparison.
inline std::vector<TimingRow> run_scaling_suite(const ScalingOptions& o) {
  std::vector<TimingRow> rows;
  auto measure = [&](const Dataset& ds, SplitVariant v) {
    const double s = time_root_split(v, ds, o.repeats, o.seed);
    rows.push_back({v, "split", ds.rows(), ds.x.cols(), ds.y.cols(), ds.x.is_sparse(), s, 1});
    if (o.full_trees) rows.push_back(time_tree(v, ds, 1, o.seed));
  };
  for (std::size_t k : o.k_values) {
    const Dataset ds = synthetic::linear_mtr(o.n, o.d, k, derive_seed(o.seed, k));
    for (auto v : o.variants) measure(ds, v);
  }
  for (std::size_t d : o.d_values) {
    const Dataset ds = synthetic::linear_mtr(o.n, d, o.k_for_d_sweep, derive_seed(o.seed, 7919 + d));
    for (auto v : o.variants) measure(ds, v);
  }
  if (o.sparse_d > 0) {
    Dataset sparse = synthetic::sparse_regression(o.n, o.sparse_d, o.k_for_d_sweep, o.sparse_density,
                                                  derive_seed(o.seed, 104729));
    Dataset dense = sparse;
    dense.x = to_dense(sparse.x);
    for (auto v : o.variants) {
      if (v == SplitVariant::kAxis) continue;
      measure(dense, v);
      measure(sparse, v);
    }
  }
  return rows;
}

inline void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows) {
  out << "variant,stage,N,D,K,sparse,seconds,nodes\n";
  for (const auto& r : rows) {
    out << variant_name(r.variant) << ',' << r.stage << ',' << r.n << ',' << r.d << ',' << r.k << ','
        << (r.sparse ? 1 : 0) << ',' << format_double(r.seconds) << ',' << r.nodes << '\n';
  }
}

}  // namespace opct::bench

#endif  // OPCT_BENCHMARK_HPP_
