#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "rapdhg/vec.hpp"

namespace rapdhg {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix supporting y = M x and y = M^T x.
///
/// Construction sums duplicate (row, col) entries and drops the result if it
/// is exactly zero, so a built matrix never stores duplicates or explicit
/// zeros. Both products accumulate in a fixed row order, which makes every
/// multiply bit-reproducible for a given matrix.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(int n_rows, int n_cols, std::vector<Triplet> entries)
      : n_rows_(n_rows), n_cols_(n_cols) {
    if (n_rows < 0 || n_cols < 0) throw std::invalid_argument("negative matrix dimension");
    for (const Triplet& t : entries) {
      if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
        throw std::out_of_range("sparse entry index out of range");
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    row_start_.assign(static_cast<std::size_t>(n_rows) + 1, 0);
    cols_.reserve(entries.size());
    values_.reserve(entries.size());
    std::size_t i = 0;
    for (int r = 0; r < n_rows; ++r) {
      row_start_[r] = static_cast<int>(cols_.size());
      while (i < entries.size() && entries[i].row == r) {
        const int c = entries[i].col;
        double v = entries[i].value;
        while (i + 1 < entries.size() && entries[i + 1].row == r && entries[i + 1].col == c) {
          ++i;
          v += entries[i].value;
        }
        ++i;
        if (v != 0.0) {
          cols_.push_back(c);
          values_.push_back(v);
        }
      }
    }
    row_start_[n_rows] = static_cast<int>(cols_.size());
  }

  static SparseMatrix identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseMatrix(n, n, std::move(t));
  }

  static SparseMatrix zero(int n_rows, int n_cols) { return SparseMatrix(n_rows, n_cols, {}); }

  int rows() const { return n_rows_; }
  int cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// y = M x, overwriting y.
  void multiply(const Vec& x, Vec& y) const {
    if (static_cast<int>(x.size()) != n_cols_)
      throw std::invalid_argument("spmv: vector length does not match column count");
    y.assign(static_cast<std::size_t>(n_rows_), 0.0);
    for (int r = 0; r < n_rows_; ++r) {
      double s = 0.0;
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) s += values_[k] * x[cols_[k]];
      y[r] = s;
    }
  }

  /// y = M^T x, overwriting y.
  void multiply_transpose(const Vec& x, Vec& y) const {
    if (static_cast<int>(x.size()) != n_rows_)
      throw std::invalid_argument("spmv_t: vector length does not match row count");
    y.assign(static_cast<std::size_t>(n_cols_), 0.0);
    for (int r = 0; r < n_rows_; ++r) {
      const double xr = x[r];
      if (xr == 0.0) continue;
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) y[cols_[k]] += values_[k] * xr;
    }
  }

  SparseMatrix transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (int r = 0; r < n_rows_; ++r)
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) t.push_back({cols_[k], r, values_[k]});
    return SparseMatrix(n_cols_, n_rows_, std::move(t));
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (int r = 0; r < n_rows_; ++r)
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) t.push_back({r, cols_[k], values_[k]});
    return t;
  }

  /// Max |M_ij - M_ji| over the union of stored patterns; 0 for symmetric M.
  double symmetry_gap() const {
    auto a = triplets();
    auto b = transpose().triplets();
    double gap = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && std::tie(a[i].row, a[i].col) < std::tie(b[j].row, b[j].col))) {
        gap = std::max(gap, std::fabs(a[i].value));
        ++i;
      } else if (i == a.size() || std::tie(b[j].row, b[j].col) < std::tie(a[i].row, a[i].col)) {
        gap = std::max(gap, std::fabs(b[j].value));
        ++j;
      } else {
        gap = std::max(gap, std::fabs(a[i].value - b[j].value));
        ++i;
        ++j;
      }
    }
    return gap;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
  }

  /// New matrix diag(r) * M * diag(c).
  SparseMatrix scaled(const Vec& r, const Vec& c) const {
    if (static_cast<int>(r.size()) != n_rows_ || static_cast<int>(c.size()) != n_cols_)
      throw std::invalid_argument("scaled: diagonal length mismatch");
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (int row = 0; row < n_rows_; ++row)
      for (int k = row_start_[row]; k < row_start_[row + 1]; ++k)
        t.push_back({row, cols_[k], r[row] * values_[k] * c[cols_[k]]});
    return SparseMatrix(n_rows_, n_cols_, std::move(t));
  }

  template <typename F>
  void for_each(F&& f) const {
    for (int r = 0; r < n_rows_; ++r)
      for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) f(r, cols_[k], values_[k]);
  }

 private:
  int n_rows_ = 0;
  int n_cols_ = 0;
  std::vector<int> row_start_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

inline Vec spmv(const SparseMatrix& m, const Vec& x) {
  Vec y;
  m.multiply(x, y);
  return y;
}

inline Vec spmv_t(const SparseMatrix& m, const Vec& x) {
  Vec y;
  m.multiply_transpose(x, y);
  return y;
}

}  // namespace rapdhg
