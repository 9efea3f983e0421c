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

// Bagging and random-forest ensembles.
//
// Tree t is grown with seed derive_seed(master_seed, t) on a bootstrap
// sample drawn from an Rng seeded the same way, so the model depends only on
// the configuration and never on how trees are scheduled across workers.

#ifndef OPCT_ENSEMBLE_HPP_
#define OPCT_ENSEMBLE_HPP_

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "opct/baseline.hpp"
#include "opct/binary_io.hpp"
#include "opct/common.hpp"
#include "opct/data.hpp"
#include "opct/matrix.hpp"
#include "opct/metrics.hpp"
#include "opct/preprocess.hpp"
#include "opct/tree.hpp"

namespace opct {

enum class EnsembleMode : std::uint8_t { kSingle = 0, kBagging = 1, kRandomForest = 2 };

inline std::string_view mode_name(EnsembleMode m) {
  switch (m) {
    case EnsembleMode::kSingle: return "single";
    case EnsembleMode::kBagging: return "bagging";
    case EnsembleMode::kRandomForest: return "rf";
  }
  return "?";
}

inline EnsembleMode parse_mode(std::string_view name) {
  if (name == "single") return EnsembleMode::kSingle;
  if (name == "bagging") return EnsembleMode::kBagging;
  if (name == "rf") return EnsembleMode::kRandomForest;
  throw std::invalid_argument("unknown ensemble mode '" + std::string(name) + "'");
}

struct EnsembleConfig {
  std::size_t n_trees = 50;  // ignored in single mode
  EnsembleMode mode = EnsembleMode::kBagging;
  GrowConfig grow;  // grow.seed is replaced per tree
  std::uint64_t master_seed = 0;
  // Random-forest feature fraction; √D/D when empty. Other modes use
  // grow.feature_subset_fraction.
  std::optional<double> rf_feature_fraction;
  // Parallel tree builders; 0 means OPCT_WORKERS or the hardware count.
  std::size_t workers = 0;
};

struct EnsembleModel {
  std::vector<Tree> trees;
  Task task = Task::kMtr;
  std::size_t n_features = 0;
  std::size_t n_targets = 0;
  EnsembleConfig config;  // workers is not persisted
  double feature_fraction = 1.0;  // fraction actually used per split
  FeatureEncoder encoder;
  std::vector<std::string> target_names;
};

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OPCT_WORKERS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

inline double effective_feature_fraction(const EnsembleConfig& cfg, std::size_t d) {
  if (cfg.mode != EnsembleMode::kRandomForest) return cfg.grow.feature_subset_fraction;
  if (cfg.rf_feature_fraction) return *cfg.rf_feature_fraction;
  return d == 0 ? 1.0 : std::sqrt(static_cast<double>(d)) / static_cast<double>(d);
}

inline Tree grow_any(const Matrix& x, const Matrix& y, const Matrix& z, std::span<const double> p,
                     const GrowConfig& cfg) {
  return cfg.split.variant == SplitVariant::kAxis ? grow_axis_parallel(x, y, z, p, cfg) : grow(x, y, z, p, cfg);
}

// Runs body(t) for t in [0, n) on up to `workers` threads. The exception of
// the lowest failing index is rethrown.
template <typename Body>
void parallel_for(std::size_t n, std::size_t workers, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t t = next++; t < n; t = next++) {
      try {
        body(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(workers, n);
  if (threads <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(run);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

inline EnsembleModel fit_ensemble(const Matrix& x, const Matrix& y, const Matrix& z, std::span<const double> p,
                                  const EnsembleConfig& cfg) {
  if (x.rows() == 0) throw std::invalid_argument("fit_ensemble: no training examples");
  const bool single = cfg.mode == EnsembleMode::kSingle;
  const std::size_t n_trees = single ? 1 : cfg.n_trees;
  if (n_trees == 0) throw std::invalid_argument("fit_ensemble: need at least one tree");

  EnsembleModel model;
  model.task = cfg.grow.task;
  model.n_features = x.cols();
  model.n_targets = y.cols();
  model.config = cfg;
  model.config.workers = 0;
  model.feature_fraction = effective_feature_fraction(cfg, x.cols());
  model.trees.resize(n_trees);

  parallel_for(n_trees, resolve_workers(cfg.workers), [&](std::size_t t) {
    GrowConfig g = cfg.grow;
    g.seed = derive_seed(cfg.master_seed, t);
    g.feature_subset_fraction = model.feature_fraction;
    if (single) {
      model.trees[t] = grow_any(x, y, z, p, g);
      return;
    }
    Rng rng(mix_seed(g.seed));
    const auto rows = bootstrap_indices(x.rows(), rng);
    model.trees[t] = grow_any(take_rows(x, rows), take_rows(y, rows), take_rows(z, rows), p, g);
  });
  return model;
}

inline EnsembleModel fit_ensemble(const Dataset& ds, EnsembleConfig cfg) {
  cfg.grow.task = ds.task;
  EnsembleModel model = fit_ensemble(ds.x, ds.y, ds.z, ds.p, cfg);
  model.encoder = ds.encoder;
  model.target_names = ds.target_names;
  return model;
}

// Row-wise mean of the per-tree prototypes.
inline DenseMatrix predict(const EnsembleModel& model, const Matrix& x) {
  if (x.cols() != model.n_features) {
    throw std::invalid_argument("predict: model expects " + std::to_string(model.n_features) + " features, got " +
                                std::to_string(x.cols()));
  }
  DenseMatrix out(x.rows(), model.n_targets, 0.0);
  for (const auto& tree : model.trees) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      const auto& proto = tree.nodes[leaf_index(tree, x, i)].prototype;
      auto row = out.row(i);
      for (std::size_t j = 0; j < proto.size(); ++j) row[j] += proto[j];
    }
  }
  const double n = static_cast<double>(model.trees.size());
  for (double& v : out.values()) v /= n;
  return out;
}

// BIN/MLC: 1 where score >= threshold. MCC: N×1 class index of the row
// maximum (lowest index on ties). Regression and HMLC scores pass through.
inline DenseMatrix decode_predictions(const DenseMatrix& scores, Task task, double threshold = 0.5) {
  switch (task) {
    case Task::kBin:
    case Task::kMlc: {
      DenseMatrix out(scores.rows(), scores.cols());
      for (std::size_t i = 0; i < scores.rows(); ++i) {
        for (std::size_t j = 0; j < scores.cols(); ++j) out(i, j) = scores(i, j) >= threshold ? 1.0 : 0.0;
      }
      return out;
    }
    case Task::kMcc: {
      DenseMatrix out(scores.rows(), 1);
      for (std::size_t i = 0; i < scores.rows(); ++i) out(i, 0) = static_cast<double>(argmax(scores.row(i)));
      return out;
    }
    default:
      return scores;
  }
}

// ---------------------------------------------------------------------------
// Binary format
//
//   "OPCE" | u32 version | u64 n_trees
//   config: u8 mode | u8 variant | u8 task | f64 feature fraction |
//           u8 has max depth | u64 max depth | u64 min examples |
//           f64 impurity threshold | u64 master seed |
//           svm: f64 C | u64 cluster iter | u64 opt iter | f64 tol |
//           grad: f64 C | f64 lr | u64 opt iter | f64 tol
//   u64 D | u64 T
//   encoder: u64 columns, per column: str name | u8 categorical |
//            u64 categories | str × categories
//   u64 target names | str × names
//   per tree: u64 byte length | tree block (see tree.hpp)

inline constexpr std::uint32_t kEnsembleFormatVersion = 1;

inline std::vector<std::uint8_t> serialize(const EnsembleModel& m) {
  ByteWriter out;
  out.raw(std::string_view("OPCE"));
  out.u32(kEnsembleFormatVersion);
  out.u64(m.trees.size());
  const auto& c = m.config;
  out.u8(static_cast<std::uint8_t>(c.mode));
  out.u8(static_cast<std::uint8_t>(c.grow.split.variant));
  out.u8(static_cast<std::uint8_t>(m.task));
  out.f64(m.feature_fraction);
  out.u8(c.grow.max_depth ? 1 : 0);
  out.u64(c.grow.max_depth.value_or(0));
  out.u64(c.grow.min_examples_to_split);
  out.f64(c.grow.impurity_reduction_threshold);
  out.u64(c.master_seed);
  out.f64(c.grow.split.svm.C);
  out.u64(c.grow.split.svm.max_cluster_iter);
  out.u64(c.grow.split.svm.max_opt_iter);
  out.f64(c.grow.split.svm.tol);
  out.f64(c.grow.split.grad.C);
  out.f64(c.grow.split.grad.lr);
  out.u64(c.grow.split.grad.max_opt_iter);
  out.f64(c.grow.split.grad.tol);
  out.u64(m.n_features);
  out.u64(m.n_targets);
  out.u64(m.encoder.columns().size());
  for (const auto& col : m.encoder.columns()) {
    out.str(col.name);
    out.u8(col.categorical ? 1 : 0);
    out.u64(col.categories.size());
    for (const auto& cat : col.categories) out.str(cat);
  }
  out.u64(m.target_names.size());
  for (const auto& name : m.target_names) out.str(name);
  for (const auto& tree : m.trees) {
    const auto block = serialize(tree);
    out.u64(block.size());
    out.raw(block);
  }
  return std::move(out).take();
}

inline EnsembleModel deserialize_ensemble(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  const auto magic = in.raw(4, "magic");
  if (std::string_view(reinterpret_cast<const char*>(magic.data()), 4) != "OPCE") in.fail("bad magic", 0);
  const std::size_t version_at = in.offset();
  if (const auto v = in.u32(); v != kEnsembleFormatVersion) {
    in.fail("unsupported ensemble format version " + std::to_string(v), version_at);
  }
  EnsembleModel m;
  const std::size_t count_at = in.offset();
  const std::uint64_t n_trees = in.u64();
  if (n_trees == 0 || n_trees > in.remaining() / 8) in.fail("implausible tree count", count_at);

  auto& c = m.config;
  std::size_t at = in.offset();
  const auto mode = in.u8();
  if (mode > 2) in.fail("unknown ensemble mode", at);
  c.mode = static_cast<EnsembleMode>(mode);
  at = in.offset();
  const auto variant = in.u8();
  if (variant > 2) in.fail("unknown split variant", at);
  c.grow.split.variant = static_cast<SplitVariant>(variant);
  at = in.offset();
  const auto task = in.u8();
  if (task > static_cast<std::uint8_t>(Task::kHmlc)) in.fail("unknown task tag", at);
  m.task = static_cast<Task>(task);
  c.grow.task = m.task;
  m.feature_fraction = in.f64();
  c.grow.feature_subset_fraction = m.feature_fraction;
  if (c.mode == EnsembleMode::kRandomForest) c.rf_feature_fraction = m.feature_fraction;
  const bool has_depth = in.u8() != 0;
  const std::uint64_t depth = in.u64();
  if (has_depth) c.grow.max_depth = depth;
  c.grow.min_examples_to_split = in.u64();
  c.grow.impurity_reduction_threshold = in.f64();
  c.master_seed = in.u64();
  c.grow.split.svm.C = in.f64();
  c.grow.split.svm.max_cluster_iter = in.u64();
  c.grow.split.svm.max_opt_iter = in.u64();
  c.grow.split.svm.tol = in.f64();
  c.grow.split.grad.C = in.f64();
  c.grow.split.grad.lr = in.f64();
  c.grow.split.grad.max_opt_iter = in.u64();
  c.grow.split.grad.tol = in.f64();
  c.n_trees = n_trees;
  m.n_features = in.u64();
  m.n_targets = in.u64();

  at = in.offset();
  const std::uint64_t n_cols = in.u64();
  if (n_cols > in.remaining() / 8) in.fail("implausible encoder column count", at);
  std::vector<FeatureEncoder::Column> columns(n_cols);
  for (auto& col : columns) {
    col.name = in.str();
    col.categorical = in.u8() != 0;
    at = in.offset();
    const std::uint64_t n_cats = in.u64();
    if (n_cats > in.remaining() / 8) in.fail("implausible category count", at);
    col.categories.resize(n_cats);
    for (auto& cat : col.categories) cat = in.str();
  }
  m.encoder = FeatureEncoder(std::move(columns));
  if (!m.encoder.empty() && m.encoder.output_width() != m.n_features) {
    in.fail("encoder width does not match feature count", at);
  }
  at = in.offset();
  const std::uint64_t n_names = in.u64();
  if (n_names > in.remaining() / 8) in.fail("implausible target name count", at);
  m.target_names.resize(n_names);
  for (auto& name : m.target_names) name = in.str();

  m.trees.reserve(n_trees);
  for (std::uint64_t t = 0; t < n_trees; ++t) {
    at = in.offset();
    const std::uint64_t len = in.u64();
    if (len > in.remaining()) in.fail("truncated tree block", at);
    const std::size_t block_at = in.offset();
    ByteReader block(in.raw(static_cast<std::size_t>(len), "tree block"), block_at);
    Tree tree = read_tree(block);
    if (!block.at_end()) block.fail("trailing bytes in tree block");
    if (tree.n_features != m.n_features || tree.n_targets != m.n_targets || tree.task != m.task) {
      in.fail("tree " + std::to_string(t) + " disagrees with the ensemble header", block_at);
    }
    m.trees.push_back(std::move(tree));
  }
  if (!in.at_end()) in.fail("trailing bytes after ensemble");
  return m;
}

}  // namespace opct

#endif  // OPCT_ENSEMBLE_HPP_
