#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rapdhg/problem.hpp"

namespace rapdhg {

/// Diagonal scaling z = (D2 x, D1 y) computed on the stacked symmetric matrix
/// M = [[Q, A'], [A, 0]] with A = [A_ineq; A_eq]. d2 holds the n primal
/// factors, d1 the m = m_i + m_e dual factors. All entries strictly positive.
struct ScalingInfo {
  Vec d1;
  Vec d2;

  static ScalingInfo identity(const QuadraticProgram& p) {
    ScalingInfo s;
    s.d1.assign(p.num_rows(), 1.0);
    s.d2.assign(p.num_vars(), 1.0);
    return s;
  }
};

namespace detail {

// Symmetric triplets of [[Q, A'],[A, 0]]: Q entries as stored, each A entry
// mirrored. Indices 0..n-1 are primal, n..n+m-1 dual (ineq rows then eq).
inline std::vector<Triplet> stacked_triplets(const QuadraticProgram& p) {
  const int n = p.num_vars();
  std::vector<Triplet> t;
  t.reserve(p.q.nnz() + 2 * (p.a_ineq.nnz() + p.a_eq.nnz()));
  p.q.for_each([&](int r, int c, double v) { t.push_back({r, c, v}); });
  p.a_ineq.for_each([&](int r, int c, double v) {
    t.push_back({n + r, c, v});
    t.push_back({c, n + r, v});
  });
  const int off = n + p.num_ineq();
  p.a_eq.for_each([&](int r, int c, double v) {
    t.push_back({off + r, c, v});
    t.push_back({c, off + r, v});
  });
  return t;
}

enum class RowMeasure { kMaxAbs, kL2, kL1 };

inline Vec row_measures(const std::vector<Triplet>& t, int size, RowMeasure kind) {
  Vec m(size, 0.0);
  for (const Triplet& e : t) {
    const double a = std::fabs(e.value);
    switch (kind) {
      case RowMeasure::kMaxAbs: m[e.row] = std::max(m[e.row], a); break;
      case RowMeasure::kL2: m[e.row] += a * a; break;
      case RowMeasure::kL1: m[e.row] += a; break;
    }
  }
  if (kind == RowMeasure::kL2)
    for (double& v : m) v = std::sqrt(v);
  return m;
}

// One symmetric equilibration pass: divide row/col j by sqrt(measure_j),
// leaving zero rows untouched (factor 1).
inline void apply_pass(std::vector<Triplet>& t, Vec& d, const Vec& measure) {
  Vec f(measure.size(), 1.0);
  for (std::size_t j = 0; j < measure.size(); ++j)
    if (measure[j] > 0.0) f[j] = 1.0 / std::sqrt(measure[j]);
  for (Triplet& e : t) e.value *= f[e.row] * f[e.col];
  for (std::size_t j = 0; j < d.size(); ++j) d[j] *= f[j];
}

inline ScalingInfo split_factors(const QuadraticProgram& p, const Vec& d) {
  ScalingInfo s;
  const int n = p.num_vars();
  s.d2.assign(d.begin(), d.begin() + n);
  s.d1.assign(d.begin() + n, d.end());
  return s;
}

}  // namespace detail

/// Ruiz equilibration alone (diagnostic use; compute_scaling runs this first).
inline ScalingInfo ruiz_scaling(const QuadraticProgram& p, int iterations) {
  auto t = detail::stacked_triplets(p);
  const int size = p.num_vars() + p.num_rows();
  Vec d(size, 1.0);
  for (int it = 0; it < iterations; ++it)
    detail::apply_pass(t, d, detail::row_measures(t, size, detail::RowMeasure::kMaxAbs));
  return detail::split_factors(p, d);
}

/// 10 Ruiz iterations, then one l2 pass, then one Pock-Chambolle (alpha = 1)
/// pass, all on the stacked symmetric matrix. The symmetric single-diagonal
/// form keeps the scaled Q symmetric automatically.
inline ScalingInfo compute_scaling(const QuadraticProgram& p) {
  auto t = detail::stacked_triplets(p);
  const int size = p.num_vars() + p.num_rows();
  Vec d(size, 1.0);
  for (int it = 0; it < 10; ++it)
    detail::apply_pass(t, d, detail::row_measures(t, size, detail::RowMeasure::kMaxAbs));
  detail::apply_pass(t, d, detail::row_measures(t, size, detail::RowMeasure::kL2));
  detail::apply_pass(t, d, detail::row_measures(t, size, detail::RowMeasure::kL1));
  return detail::split_factors(p, d);
}

/// Scaled problem: Q~ = D2 Q D2, A~ = D1 A D2, b~ = D1 b, c~ = D2 c.
inline QuadraticProgram apply_scaling(const QuadraticProgram& p, const ScalingInfo& s) {
  if (static_cast<int>(s.d2.size()) != p.num_vars() ||
      static_cast<int>(s.d1.size()) != p.num_rows())
    throw std::invalid_argument("apply_scaling: dimension mismatch");
  QuadraticProgram out = p;
  out.q = p.q.scaled(s.d2, s.d2);
  Vec d1_ineq(s.d1.begin(), s.d1.begin() + p.num_ineq());
  Vec d1_eq(s.d1.begin() + p.num_ineq(), s.d1.end());
  out.a_ineq = p.a_ineq.scaled(d1_ineq, s.d2);
  out.a_eq = p.a_eq.scaled(d1_eq, s.d2);
  for (int j = 0; j < p.num_vars(); ++j) out.c[j] = s.d2[j] * p.c[j];
  for (int i = 0; i < p.num_ineq(); ++i) out.b_ineq[i] = d1_ineq[i] * p.b_ineq[i];
  for (int i = 0; i < p.num_eq(); ++i) out.b_eq[i] = d1_eq[i] * p.b_eq[i];
  return out;
}

/// Original-space point from a scaled-space point: x = D2 x~, y = D1 y~.
inline PrimalDualPoint unscale_point(const PrimalDualPoint& z, const ScalingInfo& s) {
  PrimalDualPoint out = z;
  for (std::size_t j = 0; j < out.x.size(); ++j) out.x[j] *= s.d2[j];
  for (std::size_t i = 0; i < out.y_ineq.size(); ++i) out.y_ineq[i] *= s.d1[i];
  const std::size_t off = out.y_ineq.size();
  for (std::size_t i = 0; i < out.y_eq.size(); ++i) out.y_eq[i] *= s.d1[off + i];
  return out;
}

/// Inverse of unscale_point.
inline PrimalDualPoint scale_point(const PrimalDualPoint& z, const ScalingInfo& s) {
  PrimalDualPoint out = z;
  for (std::size_t j = 0; j < out.x.size(); ++j) out.x[j] /= s.d2[j];
  for (std::size_t i = 0; i < out.y_ineq.size(); ++i) out.y_ineq[i] /= s.d1[i];
  const std::size_t off = out.y_ineq.size();
  for (std::size_t i = 0; i < out.y_eq.size(); ++i) out.y_eq[i] /= s.d1[off + i];
  return out;
}

/// Per-index max-abs of the stacked matrix rows (equilibration diagnostic).
inline Vec stacked_row_max_abs(const QuadraticProgram& p) {
  auto t = detail::stacked_triplets(p);
  return detail::row_measures(t, p.num_vars() + p.num_rows(), detail::RowMeasure::kMaxAbs);
}

}  // namespace rapdhg
