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

// Dense row-major and CSR matrices with a shared set of numeric kernels.
//
// Every kernel visits entries in the same order for both representations and
// accumulates per column index, so the zeros a dense kernel adds are exactly
// neutral. Dense and sparse forms of one matrix therefore give bit-identical
// results, and sparse kernels cost O(nnz).

#ifndef OPCT_MATRIX_HPP_
#define OPCT_MATRIX_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "opct/common.hpp"

namespace opct {

using Vector = std::vector<double>;

// Density below which loaders and encoders choose the CSR representation.
inline constexpr double kSparseDensityThreshold = 0.1;

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
      throw std::invalid_argument("dense matrix: value count does not match shape");
    }
    for (double v : values_) {
      if (!std::isfinite(v)) throw std::invalid_argument("dense matrix: non-finite entry");
    }
  }

  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t n = rows.size();
    const std::size_t d = n == 0 ? 0 : rows.begin()->size();
    std::vector<double> values;
    values.reserve(n * d);
    for (const auto& row : rows) {
      if (row.size() != d) throw std::invalid_argument("dense matrix: ragged rows");
      values.insert(values.end(), row.begin(), row.end());
    }
    return DenseMatrix(n, d, std::move(values));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

class SparseMatrix {
 public:
  struct RowView {
    std::span<const std::size_t> indices;
    std::span<const double> values;
  };

  SparseMatrix() : row_offsets_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

  // Canonicalizes: column indices are sorted within each row and explicit
  // zeros are dropped. Duplicate or out-of-range indices are rejected.
  SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values)
      : rows_(rows), cols_(cols) {
    if (row_offsets.size() != rows + 1 || row_offsets.front() != 0 ||
        row_offsets.back() != col_indices.size() || col_indices.size() != values.size()) {
      throw std::invalid_argument("sparse matrix: inconsistent CSR arrays");
    }
    row_offsets_.reserve(rows + 1);
    row_offsets_.push_back(0);
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t i = 0; i < rows; ++i) {
      if (row_offsets[i + 1] < row_offsets[i]) {
        throw std::invalid_argument("sparse matrix: row offsets decrease");
      }
      entries.clear();
      for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
        if (col_indices[k] >= cols) {
          throw std::invalid_argument("sparse matrix: column index out of range");
        }
        if (!std::isfinite(values[k])) {
          throw std::invalid_argument("sparse matrix: non-finite entry");
        }
        entries.emplace_back(col_indices[k], values[k]);
      }
      std::sort(entries.begin(), entries.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (std::size_t k = 0; k < entries.size(); ++k) {
        if (k > 0 && entries[k].first == entries[k - 1].first) {
          throw std::invalid_argument("sparse matrix: duplicate column index");
        }
        if (entries[k].second == 0.0) continue;
        col_indices_.push_back(entries[k].first);
        values_.push_back(entries[k].second);
      }
      row_offsets_.push_back(col_indices_.size());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_indices() const { return col_indices_; }
  std::span<const double> values() const { return values_; }

  RowView row(std::size_t i) const {
    const std::size_t begin = row_offsets_[i];
    const std::size_t len = row_offsets_[i + 1] - begin;
    return {{col_indices_.data() + begin, len}, {values_.data() + begin, len}};
  }

  double at(std::size_t i, std::size_t j) const {
    const auto r = row(i);
    const auto it = std::lower_bound(r.indices.begin(), r.indices.end(), j);
    if (it == r.indices.end() || *it != j) return 0.0;
    return r.values[static_cast<std::size_t>(it - r.indices.begin())];
  }

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  friend class SparseBuilder;
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

// Appends rows whose indices are already strictly increasing. Used by the
// kernels below to avoid the canonicalizing constructor's re-sort.
class SparseBuilder {
 public:
  SparseBuilder(std::size_t cols, std::size_t expected_nnz = 0) {
    m_.cols_ = cols;
    m_.col_indices_.reserve(expected_nnz);
    m_.values_.reserve(expected_nnz);
  }
  void push(std::size_t col, double value) {
    if (value == 0.0) return;
    m_.col_indices_.push_back(col);
    m_.values_.push_back(value);
  }
  void end_row() {
    m_.row_offsets_.push_back(m_.col_indices_.size());
    ++m_.rows_;
  }
  SparseMatrix finish() && { return std::move(m_); }

 private:
  SparseMatrix m_;
};

// Tagged union of the two storage formats.
class Matrix {
 public:
  Matrix() = default;
  Matrix(DenseMatrix m) : storage_(std::move(m)) {}   // NOLINT(google-explicit-constructor)
  Matrix(SparseMatrix m) : storage_(std::move(m)) {}  // NOLINT(google-explicit-constructor)

  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }
  const DenseMatrix& dense() const { return std::get<DenseMatrix>(storage_); }
  const SparseMatrix& sparse() const { return std::get<SparseMatrix>(storage_); }

  template <typename F>
  decltype(auto) visit(F&& f) const {
    return std::visit(std::forward<F>(f), storage_);
  }

  std::size_t rows() const {
    return visit([](const auto& m) { return m.rows(); });
  }
  std::size_t cols() const {
    return visit([](const auto& m) { return m.cols(); });
  }

  double at(std::size_t i, std::size_t j) const {
    if (is_sparse()) return sparse().at(i, j);
    return dense()(i, j);
  }

  std::size_t nnz() const {
    if (is_sparse()) return sparse().nnz();
    const auto v = dense().values();
    return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double x) { return x != 0.0; }));
  }

  double density() const {
    const double cells = static_cast<double>(rows()) * static_cast<double>(cols());
    return cells == 0.0 ? 0.0 : static_cast<double>(nnz()) / cells;
  }

  // Calls f(col, value) for the entries of row i in increasing column order.
  // Dense rows report every entry, zeros included.
  template <typename F>
  void for_each_in_row(std::size_t i, F&& f) const {
    if (is_sparse()) {
      const auto r = sparse().row(i);
      for (std::size_t k = 0; k < r.indices.size(); ++k) f(r.indices[k], r.values[k]);
    } else {
      const auto r = dense().row(i);
      for (std::size_t j = 0; j < r.size(); ++j) f(j, r[j]);
    }
  }

 private:
  std::variant<DenseMatrix, SparseMatrix> storage_;
};

namespace detail {

// Four interleaved partial sums selected by column index. Keeps sparse and
// dense dot products bit-identical while breaking the dependency chain.
struct Accumulator4 {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  void add(std::size_t j, double x) { lane[j & 3] += x; }
  double sum() const { return (lane[0] + lane[1]) + (lane[2] + lane[3]); }
};

inline double dense_dot(std::span<const double> row, std::span<const double> v) {
  Accumulator4 acc;
  const std::size_t n = row.size();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc.lane[0] += row[j] * v[j];
    acc.lane[1] += row[j + 1] * v[j + 1];
    acc.lane[2] += row[j + 2] * v[j + 2];
    acc.lane[3] += row[j + 3] * v[j + 3];
  }
  for (; j < n; ++j) acc.add(j, row[j] * v[j]);
  return acc.sum();
}

inline double sparse_dot(const SparseMatrix::RowView& row, std::span<const double> v) {
  Accumulator4 acc;
  for (std::size_t k = 0; k < row.indices.size(); ++k) {
    acc.add(row.indices[k], row.values[k] * v[row.indices[k]]);
  }
  return acc.sum();
}

inline void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace detail

// Dot product of row i with v.
inline double row_dot(const Matrix& m, std::size_t i, std::span<const double> v) {
  if (m.is_sparse()) return detail::sparse_dot(m.sparse().row(i), v);
  return detail::dense_dot(m.dense().row(i), v);
}

inline Vector matvec(const Matrix& m, std::span<const double> v) {
  detail::require(v.size() == m.cols(), "matvec: vector length does not match column count");
  Vector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = row_dot(m, i, v);
  return out;
}

// out = Mᵀ v, accumulated row by row.
inline Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  detail::require(v.size() == m.rows(), "matvec_transposed: vector length does not match row count");
  Vector out(m.cols(), 0.0);
  if (m.is_sparse()) {
    const auto& s = m.sparse();
    for (std::size_t i = 0; i < s.rows(); ++i) {
      const auto r = s.row(i);
      const double vi = v[i];
      for (std::size_t k = 0; k < r.indices.size(); ++k) out[r.indices[k]] += r.values[k] * vi;
    }
  } else {
    const auto& d = m.dense();
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const auto r = d.row(i);
      const double vi = v[i];
      for (std::size_t j = 0; j < r.size(); ++j) out[j] += r[j] * vi;
    }
  }
  return out;
}

// Per-column Σ_i a_i M_ij and Σ_i a_i M_ij² in one pass.
inline std::pair<Vector, Vector> weighted_colsums(const Matrix& m, std::span<const double> a) {
  Vector sum(m.cols(), 0.0);
  Vector sum_sq(m.cols(), 0.0);
  if (m.is_sparse()) {
    const auto& s = m.sparse();
    for (std::size_t i = 0; i < s.rows(); ++i) {
      const auto r = s.row(i);
      const double ai = a[i];
      for (std::size_t k = 0; k < r.indices.size(); ++k) {
        const double x = r.values[k];
        sum[r.indices[k]] += ai * x;
        sum_sq[r.indices[k]] += ai * (x * x);
      }
    }
  } else {
    const auto& d = m.dense();
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const auto r = d.row(i);
      const double ai = a[i];
      for (std::size_t j = 0; j < r.size(); ++j) {
        sum[j] += ai * r[j];
        sum_sq[j] += ai * (r[j] * r[j]);
      }
    }
  }
  return {std::move(sum), std::move(sum_sq)};
}

namespace detail {

inline double checked_weight_total(const Matrix& m, std::span<const double> a) {
  require(a.size() == m.rows(), "weights length does not match row count");
  double total = 0.0;
  for (double w : a) {
    require(w >= 0.0, "weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw DegenerateWeights("weights sum to zero");
  return total;
}

}  // namespace detail

inline Vector weighted_colmean(const Matrix& m, std::span<const double> a) {
  const double total = detail::checked_weight_total(m, a);
  Vector mean = matvec_transposed(m, a);
  for (double& x : mean) x /= total;
  return mean;
}

// Weighted mean and variance (mean(v²) − mean(v)², clamped at zero).
inline std::pair<Vector, Vector> weighted_colmoments(const Matrix& m, std::span<const double> a) {
  const double total = detail::checked_weight_total(m, a);
  auto [mean, var] = weighted_colsums(m, a);
  for (std::size_t j = 0; j < mean.size(); ++j) {
    mean[j] /= total;
    var[j] = std::max(0.0, var[j] / total - mean[j] * mean[j]);
  }
  return {std::move(mean), std::move(var)};
}

inline Vector weighted_colvar(const Matrix& m, std::span<const double> a) {
  return weighted_colmoments(m, a).second;
}

inline Vector colmean(const Matrix& m) {
  detail::require(m.rows() >= 1, "colmean: empty matrix");
  const Vector ones(m.rows(), 1.0);
  return weighted_colmean(m, ones);
}

inline std::pair<Vector, Vector> colmoments(const Matrix& m) {
  detail::require(m.rows() >= 1, "colmoments: empty matrix");
  const Vector ones(m.rows(), 1.0);
  return weighted_colmoments(m, ones);
}

inline DenseMatrix to_dense(const Matrix& m) {
  if (!m.is_sparse()) return m.dense();
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m.for_each_in_row(i, [&](std::size_t j, double x) { out(i, j) = x; });
  }
  return out;
}

inline SparseMatrix to_sparse(const Matrix& m) {
  if (m.is_sparse()) return m.sparse();
  SparseBuilder builder(m.cols(), m.nnz());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m.for_each_in_row(i, [&](std::size_t j, double x) { builder.push(j, x); });
    builder.end_row();
  }
  return std::move(builder).finish();
}

// CSR when the density is below the threshold, dense otherwise.
inline Matrix auto_representation(const Matrix& m) {
  const bool sparse = m.density() < kSparseDensityThreshold;
  if (sparse == m.is_sparse()) return m;
  if (sparse) return to_sparse(m);
  return to_dense(m);
}

inline Matrix take_rows(const Matrix& m, std::span<const std::size_t> rows) {
  if (m.is_sparse()) {
    const auto& s = m.sparse();
    std::size_t nnz = 0;
    for (std::size_t r : rows) nnz += s.row(r).indices.size();
    SparseBuilder builder(s.cols(), nnz);
    for (std::size_t r : rows) {
      const auto row = s.row(r);
      for (std::size_t k = 0; k < row.indices.size(); ++k) builder.push(row.indices[k], row.values[k]);
      builder.end_row();
    }
    return std::move(builder).finish();
  }
  const auto& d = m.dense();
  std::vector<double> values;
  values.reserve(rows.size() * d.cols());
  for (std::size_t r : rows) {
    const auto row = d.row(r);
    values.insert(values.end(), row.begin(), row.end());
  }
  return DenseMatrix(rows.size(), d.cols(), std::move(values));
}

// Keeps the listed columns (strictly increasing), renumbered 0..cols.size()-1.
inline Matrix take_cols(const Matrix& m, std::span<const std::size_t> cols) {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    detail::require(cols[k] < m.cols() && (k == 0 || cols[k] > cols[k - 1]),
                    "take_cols: column list must be increasing and in range");
  }
  if (m.is_sparse()) {
    std::vector<std::size_t> remap(m.cols(), static_cast<std::size_t>(-1));
    for (std::size_t k = 0; k < cols.size(); ++k) remap[cols[k]] = k;
    SparseBuilder builder(cols.size(), m.nnz());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      m.for_each_in_row(i, [&](std::size_t j, double x) {
        if (remap[j] != static_cast<std::size_t>(-1)) builder.push(remap[j], x);
      });
      builder.end_row();
    }
    return std::move(builder).finish();
  }
  const auto& d = m.dense();
  std::vector<double> values;
  values.reserve(d.rows() * cols.size());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j : cols) values.push_back(d(i, j));
  }
  return DenseMatrix(d.rows(), cols.size(), std::move(values));
}

// Elementwise square.
inline Matrix square(const Matrix& m) {
  if (m.is_sparse()) {
    SparseBuilder builder(m.cols(), m.nnz());
    for (std::size_t i = 0; i < m.rows(); ++i) {
      m.for_each_in_row(i, [&](std::size_t j, double x) { builder.push(j, x * x); });
      builder.end_row();
    }
    return std::move(builder).finish();
  }
  const auto v = m.dense().values();
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return x * x; });
  return DenseMatrix(m.rows(), m.cols(), std::move(out));
}

// Row-major copy into a plain vector of rows; handy for tests and printing.
inline std::vector<Vector> to_rows(const Matrix& m) {
  std::vector<Vector> out(m.rows(), Vector(m.cols(), 0.0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    m.for_each_in_row(i, [&](std::size_t j, double x) { out[i][j] = x; });
  }
  return out;
}

// Logical (representation-independent) equality.
inline bool same_content(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return to_dense(a) == to_dense(b);
}

}  // namespace opct

#endif  // OPCT_MATRIX_HPP_
