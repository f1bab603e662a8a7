#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rapdhg/sparse.hpp"
#include "rapdhg/vec.hpp"

namespace rapdhg {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Canonical convex QP
///
///   minimize   1/2 x'Qx + c'x + obj_offset
///   subject to A_ineq x <= b_ineq          (duals y_ineq >= 0)
///              A_eq   x  = b_eq            (duals y_eq free)
///
/// Q must be symmetric PSD. Variable bounds and >= / ranged rows are folded
/// into this form by canonicalize().
struct QuadraticProgram {
  SparseMatrix q;
  Vec c;
  SparseMatrix a_ineq;
  Vec b_ineq;
  SparseMatrix a_eq;
  Vec b_eq;
  std::string name;
  double obj_offset = 0.0;
  std::vector<std::string> var_names;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_ineq() const { return static_cast<int>(b_ineq.size()); }
  int num_eq() const { return static_cast<int>(b_eq.size()); }
  int num_rows() const { return num_ineq() + num_eq(); }

  void validate() const {
    const int n = num_vars();
    if (q.rows() != n || q.cols() != n) throw std::invalid_argument("Q dimension mismatch");
    if (a_ineq.rows() != num_ineq() || a_ineq.cols() != n)
      throw std::invalid_argument("inequality block dimension mismatch");
    if (a_eq.rows() != num_eq() || a_eq.cols() != n)
      throw std::invalid_argument("equality block dimension mismatch");
    const double gap = q.symmetry_gap();
    if (gap > 1e-12 * std::max(1.0, q.max_abs()))
      throw std::invalid_argument("Q is not symmetric");
  }

  double objective(const Vec& x) const {
    Vec qx = spmv(q, x);
    return 0.5 * dot(x, qx) + dot(c, x) + obj_offset;
  }
};

struct PrimalDualPoint {
  Vec x;
  Vec y_ineq;
  Vec y_eq;

  static PrimalDualPoint zeros(const QuadraticProgram& p) {
    PrimalDualPoint z;
    z.x.assign(p.num_vars(), 0.0);
    z.y_ineq.assign(p.num_ineq(), 0.0);
    z.y_eq.assign(p.num_eq(), 0.0);
    return z;
  }
};

enum class RowType { kEq, kLe, kGe };

/// A problem as read from a QPS file: typed rows, optional ranges, and
/// variable bounds, before conversion to the canonical <= / = form.
struct RawProblem {
  std::string name;
  SparseMatrix q;          // n x n, full (mirrored) matrix
  Vec c;
  double obj_offset = 0.0;
  SparseMatrix a;          // one row per constraint, original orientation
  std::vector<RowType> row_types;
  Vec rhs;
  Vec range;               // NaN when the row has no RANGES entry
  Vec lower;               // variable bounds, +-inf allowed
  Vec upper;
  std::vector<std::string> row_names;
  std::vector<std::string> var_names;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }
};

/// Provenance of each canonical row, for reporting solutions against the
/// original model. Variables keep their original order.
struct CanonicalMap {
  std::vector<std::string> ineq_labels;
  std::vector<std::string> eq_labels;
};

struct CanonicalProblem {
  QuadraticProgram qp;
  CanonicalMap map;
};

namespace detail {

// Interval [lo, hi] a row constrains a'x to, after applying any range.
// MPS ranges convention: L row: [rhs-|r|, rhs]; G row: [rhs, rhs+|r|];
// E row: r >= 0 -> [rhs, rhs+r], r < 0 -> [rhs-|r|, rhs].
inline std::pair<double, double> row_interval(RowType type, double rhs, double range) {
  const bool has_range = !std::isnan(range);
  switch (type) {
    case RowType::kLe:
      return {has_range ? rhs - std::fabs(range) : -kInf, rhs};
    case RowType::kGe:
      return {rhs, has_range ? rhs + std::fabs(range) : kInf};
    case RowType::kEq:
      if (!has_range) return {rhs, rhs};
      return range >= 0.0 ? std::make_pair(rhs, rhs + range) : std::make_pair(rhs - std::fabs(range), rhs);
  }
  return {rhs, rhs};
}

}  // namespace detail

/// Maps a RawProblem onto the canonical form:
///  - G rows are negated into <= rows; ranged rows split into two <= rows
///  - pure E rows stay in the equality block (free duals)
///  - finite variable bounds become singleton <= rows
inline CanonicalProblem canonicalize(const RawProblem& raw) {
  const int n = raw.num_vars();
  for (double v : raw.c)
    if (std::isnan(v)) throw std::invalid_argument("NaN in objective vector");
  for (double v : raw.rhs)
    if (std::isnan(v)) throw std::invalid_argument("NaN in right-hand side");
  for (int j = 0; j < n; ++j) {
    if (std::isnan(raw.lower[j]) || std::isnan(raw.upper[j]))
      throw std::invalid_argument("NaN variable bound");
    if (raw.lower[j] > raw.upper[j])
      throw std::invalid_argument("infeasible bounds on variable " +
                                  (j < static_cast<int>(raw.var_names.size()) ? raw.var_names[j]
                                                                              : std::to_string(j)));
  }

  CanonicalProblem out;
  std::vector<Triplet> ineq, eq;
  Vec b_ineq, b_eq;
  auto row_label = [&](int i) {
    return i < static_cast<int>(raw.row_names.size()) ? raw.row_names[i] : "r" + std::to_string(i);
  };

  const auto a_rows = raw.a.triplets();
  std::vector<std::vector<Triplet>> by_row(raw.num_rows());
  for (const Triplet& t : a_rows) by_row[t.row].push_back(t);

  auto push_le = [&](const std::vector<Triplet>& coeffs, double sign, double rhs,
                     const std::string& label) {
    const int r = static_cast<int>(b_ineq.size());
    for (const Triplet& t : coeffs) ineq.push_back({r, t.col, sign * t.value});
    b_ineq.push_back(rhs);
    out.map.ineq_labels.push_back(label);
  };

  for (int i = 0; i < raw.num_rows(); ++i) {
    const auto [lo, hi] = detail::row_interval(raw.row_types[i], raw.rhs[i], raw.range[i]);
    if (lo == hi) {
      const int r = static_cast<int>(b_eq.size());
      for (const Triplet& t : by_row[i]) eq.push_back({r, t.col, t.value});
      b_eq.push_back(raw.rhs[i]);
      out.map.eq_labels.push_back("row:" + row_label(i));
      continue;
    }
    if (hi < kInf) push_le(by_row[i], 1.0, hi, "row:" + row_label(i) + ":ub");
    if (lo > -kInf) push_le(by_row[i], -1.0, -lo, "row:" + row_label(i) + ":lb");
  }

  for (int j = 0; j < n; ++j) {
    const std::string vname =
        j < static_cast<int>(raw.var_names.size()) ? raw.var_names[j] : "x" + std::to_string(j);
    if (raw.upper[j] < kInf)
      push_le({{0, j, 1.0}}, 1.0, raw.upper[j], "bound:" + vname + ":ub");
    if (raw.lower[j] > -kInf)
      push_le({{0, j, 1.0}}, -1.0, -raw.lower[j], "bound:" + vname + ":lb");
  }

  out.qp.q = raw.q;
  out.qp.c = raw.c;
  out.qp.obj_offset = raw.obj_offset;
  out.qp.name = raw.name;
  out.qp.var_names = raw.var_names;
  out.qp.a_ineq = SparseMatrix(static_cast<int>(b_ineq.size()), n, std::move(ineq));
  out.qp.b_ineq = std::move(b_ineq);
  out.qp.a_eq = SparseMatrix(static_cast<int>(b_eq.size()), n, std::move(eq));
  out.qp.b_eq = std::move(b_eq);
  out.qp.validate();
  return out;
}

}  // namespace rapdhg
