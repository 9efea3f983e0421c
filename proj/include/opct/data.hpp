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

// Datasets, text formats and resampling.
//
// Text formats:
//   * CSV: header row, comma-separated cells. Non-numeric feature columns are
//     one-hot encoded in first-seen order. No quoting.
//   * Sparse features: one line per example of `index:value` pairs with
//     0-based, strictly increasing indices; an optional first line
//     `#dims N D` fixes the shape. An empty line is an all-zero row.
//   * Label sets: one line per example of comma-separated label names; an
//     empty line means no labels.
//   * Hierarchy: `parent<TAB>child` lines of label names.

#ifndef OPCT_DATA_HPP_
#define OPCT_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opct/common.hpp"
#include "opct/matrix.hpp"
#include "opct/preprocess.hpp"

namespace opct {

struct Dataset {
  Matrix x;
  Matrix y;
  Matrix z;  // clustering attributes, Y unless set otherwise
  Vector p;  // clustering attribute weights
  Task task = Task::kMtr;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  std::optional<HierarchyGraph> hierarchy;
  FeatureEncoder encoder;  // empty for sparse feature files

  std::size_t rows() const { return x.rows(); }
};

namespace detail {

inline bool is_binary(const Matrix& m) {
  bool ok = true;
  for (std::size_t i = 0; i < m.rows() && ok; ++i) {
    m.for_each_in_row(i, [&](std::size_t, double v) { ok = ok && (v == 0.0 || v == 1.0); });
  }
  return ok;
}

}  // namespace detail

// Validates task shape rules and wires Z = Y with unit weights. HMLC targets
// are closed under the hierarchy and weighted by 0.75^depth.
inline Dataset make_dataset(Matrix x, Matrix y, Task task, std::optional<HierarchyGraph> hierarchy = std::nullopt) {
  if (x.rows() != y.rows()) throw std::invalid_argument("dataset: feature and target row counts differ");
  if ((task == Task::kStr || task == Task::kBin) && y.cols() != 1) {
    throw std::invalid_argument(std::string("dataset: task ") + std::string(task_name(task)) + " needs one target");
  }
  if (is_classification(task) && !detail::is_binary(y)) {
    throw std::invalid_argument("dataset: classification targets must be 0/1");
  }
  if (task == Task::kMcc) {
    for (std::size_t i = 0; i < y.rows(); ++i) {
      double sum = 0.0;
      y.for_each_in_row(i, [&](std::size_t, double v) { sum += v; });
      if (sum != 1.0) throw std::invalid_argument("dataset: mcc row " + std::to_string(i) + " is not one-hot");
    }
  }
  if (hierarchy && task != Task::kHmlc) throw std::invalid_argument("dataset: hierarchy given for a non-hmlc task");
  if (task == Task::kHmlc && !hierarchy) throw std::invalid_argument("dataset: hmlc needs a hierarchy");

  Dataset ds;
  ds.task = task;
  if (task == Task::kHmlc) {
    if (hierarchy->label_count() != y.cols()) throw std::invalid_argument("dataset: hierarchy size does not match targets");
    y = expand_hierarchy(y, *hierarchy);
    ds.p = hierarchy_label_weights(*hierarchy);
  } else {
    ds.p.assign(y.cols(), 1.0);
  }
  ds.x = std::move(x);
  ds.y = std::move(y);
  ds.z = ds.y;
  ds.hierarchy = std::move(hierarchy);
  return ds;
}

// ---------------------------------------------------------------------------
// Text helpers

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_cells(std::string_view line, char sep = ',') {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

[[noreturn]] inline void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what, line);
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] is file line i + 2
};

inline CsvTable read_csv(const std::string& path) {
  const auto lines = read_lines(path);
  std::size_t last = lines.size();
  while (last > 0 && trim(lines[last - 1]).empty()) --last;
  if (last == 0) parse_fail(path, 1, "empty file");
  CsvTable t;
  t.header = split_cells(lines[0]);
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (t.header[c].empty()) parse_fail(path, 1, "column " + std::to_string(c + 1) + " has an empty name");
  }
  for (std::size_t l = 1; l < last; ++l) {
    auto cells = split_cells(lines[l]);
    if (cells.size() != t.header.size()) {
      parse_fail(path, l + 1, "expected " + std::to_string(t.header.size()) + " cells, found " +
                                  std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

namespace detail {

inline double parse_cell(const std::string& path, std::size_t line, const std::string& column,
                         const std::string& cell) {
  double v = 0.0;
  if (!parse_double(cell, v) || !std::isfinite(v)) {
    parse_fail(path, line, "column '" + column + "': not a number: '" + cell + "'");
  }
  return v;
}

// Target matrix from the selected CSV columns, following the task's rules.
inline Matrix encode_targets(const std::string& path, const CsvTable& t, const std::vector<std::size_t>& cols,
                             Task task, std::vector<std::string>& names) {
  const std::size_t n = t.rows.size();
  names.clear();
  if (task == Task::kMcc || task == Task::kBin) {
    if (cols.size() != 1) parse_fail(path, 1, std::string(task_name(task)) + " needs exactly one target column");
    const std::size_t c = cols[0];
    std::vector<std::string> classes;
    std::vector<std::size_t> labels(n);
    bool numeric01 = task == Task::kBin;
    for (std::size_t i = 0; i < n && numeric01; ++i) {
      double v = 0.0;
      numeric01 = parse_double(t.rows[i][c], v) && (v == 0.0 || v == 1.0);
    }
    if (numeric01) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = parse_cell(path, i + 2, t.header[c], t.rows[i][c]);
      names.push_back(t.header[c]);
      return DenseMatrix(n, 1, std::move(v));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto& cell = t.rows[i][c];
      auto it = std::find(classes.begin(), classes.end(), cell);
      if (it == classes.end()) {
        classes.push_back(cell);
        it = classes.end() - 1;
      }
      labels[i] = static_cast<std::size_t>(it - classes.begin());
    }
    if (task == Task::kBin) {
      if (classes.size() > 2) parse_fail(path, 1, "bin target '" + t.header[c] + "' has more than two values");
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(labels[i]);
      names.push_back(t.header[c]);
      return DenseMatrix(n, 1, std::move(v));
    }
    names = classes;
    return one_hot_targets(labels, classes.size());
  }
  if (task == Task::kStr && cols.size() != 1) parse_fail(path, 1, "str needs exactly one target column");
  std::vector<double> v(n * cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double x = parse_cell(path, i + 2, t.header[cols[k]], t.rows[i][cols[k]]);
      if (is_classification(task) && x != 0.0 && x != 1.0) {
        parse_fail(path, i + 2, "column '" + t.header[cols[k]] + "': label value must be 0 or 1");
      }
      v[i * cols.size() + k] = x;
    }
  }
  for (std::size_t c : cols) names.push_back(t.header[c]);
  const Matrix y = DenseMatrix(n, cols.size(), std::move(v));
  return is_classification(task) ? auto_representation(y) : y;
}

}  // namespace detail

struct TargetSpec {
  std::vector<std::string> columns;
  Task task = Task::kStr;
};

// Features and targets from one CSV file. Columns not named in `spec` are
// features. Matrices below 10% density are stored as CSR.
inline Dataset load_dense_csv(const std::string& path, const TargetSpec& spec,
                              std::optional<HierarchyGraph> hierarchy = std::nullopt) {
  const CsvTable t = read_csv(path);
  std::vector<std::size_t> target_cols;
  for (const auto& name : spec.columns) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) parse_fail(path, 1, "missing column '" + name + "'");
    target_cols.push_back(static_cast<std::size_t>(it - t.header.begin()));
  }
  if (target_cols.empty()) parse_fail(path, 1, "no target columns given");
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (std::find(target_cols.begin(), target_cols.end(), c) == target_cols.end()) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) parse_fail(path, 1, "no feature columns");
  if (t.rows.empty()) parse_fail(path, 2, "no data rows");

  std::vector<std::string> feature_header;
  for (std::size_t c : feature_cols) feature_header.push_back(t.header[c]);
  std::vector<std::vector<std::string>> feature_rows(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t c : feature_cols) feature_rows[i].push_back(t.rows[i][c]);
  }
  FeatureEncoder encoder = FeatureEncoder::fit(feature_header, feature_rows);
  Matrix x = encoder.apply(feature_rows, 2);
  for (auto& cell : feature_rows) cell.clear();

  std::vector<std::string> target_names;
  Matrix y = detail::encode_targets(path, t, target_cols, spec.task, target_names);
  Dataset ds = make_dataset(std::move(x), std::move(y), spec.task, std::move(hierarchy));
  ds.feature_names = encoder.output_names();
  ds.target_names = std::move(target_names);
  ds.encoder = std::move(encoder);
  return ds;
}

struct EncodedFeatures {
  Matrix x;
  FeatureEncoder encoder;
  std::vector<std::string> names;
};

// A CSV file whose every column is a feature.
inline EncodedFeatures load_features_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  EncodedFeatures out;
  out.encoder = FeatureEncoder::fit(t.header, t.rows);
  out.x = out.encoder.apply(t.rows, 2);
  out.names = out.encoder.output_names();
  return out;
}

// A CSV file whose every column is a target.
inline std::pair<Matrix, std::vector<std::string>> load_targets_csv(const std::string& path, Task task) {
  const CsvTable t = read_csv(path);
  std::vector<std::size_t> cols(t.header.size());
  std::iota(cols.begin(), cols.end(), 0);
  std::vector<std::string> names;
  Matrix y = detail::encode_targets(path, t, cols, task, names);
  return {std::move(y), std::move(names)};
}

// `expected_cols`, when given, overrides the width inferred from the data but
// not one declared by a `#dims` line.
inline Matrix load_sparse_features(const std::string& path, std::optional<std::size_t> expected_cols = std::nullopt) {
  auto lines = read_lines(path);
  std::optional<std::size_t> declared_rows, declared_cols;
  std::size_t first = 0;
  if (!lines.empty() && lines[0].rfind("#dims", 0) == 0) {
    std::istringstream head(lines[0].substr(5));
    std::size_t n = 0, d = 0;
    std::string extra;
    if (!(head >> n >> d) || (head >> extra)) parse_fail(path, 1, "malformed #dims line");
    declared_rows = n;
    declared_cols = d;
    first = 1;
  }
  const std::optional<std::size_t> width = declared_cols ? declared_cols : expected_cols;
  std::vector<std::size_t> offsets{0}, indices;
  std::vector<double> values;
  std::size_t max_index_plus_one = 0;
  for (std::size_t l = first; l < lines.size(); ++l) {
    const std::size_t line_no = l + 1;
    std::istringstream tokens(lines[l]);
    std::string token;
    bool have_prev = false;
    std::size_t prev = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) parse_fail(path, line_no, "malformed pair '" + token + "'");
      std::size_t index = 0;
      const auto idx_text = std::string_view(token).substr(0, colon);
      auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), index);
      double value = 0.0;
      if (ec != std::errc() || ptr != idx_text.data() + idx_text.size() || idx_text.empty() ||
          !parse_double(std::string_view(token).substr(colon + 1), value) || !std::isfinite(value)) {
        parse_fail(path, line_no, "malformed pair '" + token + "'");
      }
      if (have_prev && index <= prev) {
        parse_fail(path, line_no, "index " + std::to_string(index) + " is not greater than previous index " +
                                      std::to_string(prev));
      }
      if (width && index >= *width) {
        parse_fail(path, line_no, "index " + std::to_string(index) + " out of range for " + std::to_string(*width) +
                                      " columns");
      }
      have_prev = true;
      prev = index;
      max_index_plus_one = std::max(max_index_plus_one, index + 1);
      indices.push_back(index);
      values.push_back(value);
    }
    offsets.push_back(indices.size());
  }
  const std::size_t rows = offsets.size() - 1;
  if (declared_rows && *declared_rows != rows) {
    parse_fail(path, 1, "#dims declares " + std::to_string(*declared_rows) + " rows, file has " + std::to_string(rows));
  }
  return SparseMatrix(rows, width.value_or(max_index_plus_one), std::move(offsets), std::move(indices),
                      std::move(values));
}

// One label name per line.
inline std::vector<std::string> load_label_names(const std::string& path) {
  std::vector<std::string> names;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    auto name = trim(line);
    if (name.empty()) continue;
    if (std::find(names.begin(), names.end(), name) != names.end()) parse_fail(path, line_no, "duplicate label '" + name + "'");
    names.push_back(std::move(name));
  }
  return names;
}

inline Matrix load_label_sets(const std::string& path, const std::vector<std::string>& label_names) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < label_names.size(); ++j) index.emplace(label_names[j], j);
  SparseBuilder builder(label_names.size());
  std::size_t line_no = 0;
  std::vector<std::size_t> row;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    row.clear();
    if (!trim(line).empty()) {
      for (const auto& name : split_cells(line)) {
        if (name.empty()) continue;
        const auto it = index.find(name);
        if (it == index.end()) parse_fail(path, line_no, "unknown label '" + name + "'");
        row.push_back(it->second);
      }
    }
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (std::size_t j : row) builder.push(j, 1.0);
    builder.end_row();
  }
  return std::move(builder).finish();
}

// Label names in first-seen order across the file.
inline std::vector<std::string> collect_label_names(const std::string& path) {
  std::vector<std::string> names;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty()) continue;
    for (const auto& name : split_cells(line)) {
      if (!name.empty() && std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
    }
  }
  return names;
}

// With `label_names`, every label must be listed there and label indices
// follow that order; otherwise labels are numbered in first-seen order.
inline HierarchyGraph load_hierarchy(const std::string& path,
                                     const std::optional<std::vector<std::string>>& label_names = std::nullopt) {
  std::vector<std::string> names = label_names.value_or(std::vector<std::string>{});
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < names.size(); ++j) index.emplace(names[j], j);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t line_no = 0;
  auto lookup = [&](const std::string& name) {
    if (const auto it = index.find(name); it != index.end()) return it->second;
    if (label_names) parse_fail(path, line_no, "unknown label '" + name + "'");
    names.push_back(name);
    index.emplace(name, names.size() - 1);
    return names.size() - 1;
  };
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> parts;
    if (line.find('\t') != std::string::npos) {
      parts = split_cells(line, '\t');
    } else {
      std::istringstream tokens(line);
      std::string token;
      while (tokens >> token) parts.push_back(token);
    }
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) parse_fail(path, line_no, "expected 'parent<TAB>child'");
    const std::size_t parent = lookup(parts[0]);
    const std::size_t child = lookup(parts[1]);
    edges.emplace_back(parent, child);
  }
  return HierarchyGraph(std::move(names), edges);
}

// ---------------------------------------------------------------------------
// Writers

inline void write_sparse_features(std::ostream& out, const Matrix& m, bool with_dims = true) {
  if (with_dims) out << "#dims " << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    bool first = true;
    m.for_each_in_row(i, [&](std::size_t j, double v) {
      if (v == 0.0) return;
      out << (first ? "" : " ") << j << ':' << format_double(v);
      first = false;
    });
    out << '\n';
  }
}

inline void write_label_sets(std::ostream& out, const Matrix& y, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < y.rows(); ++i) {
    bool first = true;
    y.for_each_in_row(i, [&](std::size_t j, double v) {
      if (v == 0.0) return;
      out << (first ? "" : ",") << names[j];
      first = false;
    });
    out << '\n';
  }
}

inline void write_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& header) {
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m.at(i, j));
    out << '\n';
  }
}

// One line of comma-separated scores per row, no header.
inline void write_scores(std::ostream& out, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m.at(i, j));
    out << '\n';
  }
}

inline DenseMatrix load_scores(const std::string& path) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (rows == 0) cols = cells.size();
    if (cells.size() != cols) parse_fail(path, line_no, "expected " + std::to_string(cols) + " scores");
    for (const auto& c : cells) values.push_back(detail::parse_cell(path, line_no, "score", c));
    ++rows;
  }
  return DenseMatrix(rows, cols, std::move(values));
}

// ---------------------------------------------------------------------------
// Resampling

struct FoldPlan {
  std::vector<std::size_t> fold_of;  // fold index per example
  std::size_t k = 0;
  std::uint64_t seed = 0;
  bool stratified = false;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
  }
  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
  }
};

// Seeded shuffle, then folds dealt in order. With `strata`, each class is
// shuffled separately and dealt continuing the running position, so every
// fold holds each class's count divided by k, within one example.
inline FoldPlan kfold(std::size_t n, std::size_t k, std::uint64_t seed,
                      std::optional<std::span<const std::size_t>> strata = std::nullopt) {
  if (k < 2) throw std::invalid_argument("kfold: need k >= 2");
  if (k > n) throw std::invalid_argument("kfold: more folds (" + std::to_string(k) + ") than examples (" +
                                         std::to_string(n) + ")");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = strata.has_value();
  plan.fold_of.assign(n, 0);
  Rng rng(seed);
  if (!strata) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t pos = 0; pos < n; ++pos) plan.fold_of[order[pos]] = pos * k / n;
    return plan;
  }
  if (strata->size() != n) throw std::invalid_argument("kfold: strata length does not match n");
  const std::size_t classes = n == 0 ? 0 : *std::max_element(strata->begin(), strata->end()) + 1;
  std::vector<std::vector<std::size_t>> members(classes);
  for (std::size_t i = 0; i < n; ++i) members[(*strata)[i]].push_back(i);
  std::size_t position = 0;
  for (auto& group : members) {
    std::shuffle(group.begin(), group.end(), rng);
    for (std::size_t i : group) plan.fold_of[i] = position++ % k;
  }
  return plan;
}

inline std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
  if (n == 0) return {};
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

// Rows of every matrix in the dataset; metadata is carried over.
inline Dataset take_rows(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out = ds;
  out.x = take_rows(ds.x, rows);
  out.y = take_rows(ds.y, rows);
  out.z = take_rows(ds.z, rows);
  return out;
}

}  // namespace opct

#endif  // OPCT_DATA_HPP_
