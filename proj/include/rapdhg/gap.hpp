#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "rapdhg/kkt.hpp"
#include "rapdhg/problem.hpp"

// Smoothed-duality-gap oracles and the scaled KKT residual. These are
// diagnostic / test-surface utilities with explicit dense size caps; the
// solve path never calls them.

namespace rapdhg {

struct SmoothedGapParams {
  double xi = 1.0;
  PrimalDualPoint center;  // typically a verified optimum z*
};

namespace gap_detail {

inline Eigen::MatrixXd to_dense(const SparseMatrix& m) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  m.for_each([&](int r, int c, double v) { d(r, c) = v; });
  return d;
}

inline Eigen::VectorXd to_eigen(const Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// Stacked constraint data (A, b) with the first m_i rows the inequalities.
struct Stacked {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  int num_ineq = 0;
};

inline Stacked stacked(const QuadraticProgram& p) {
  Stacked s;
  s.num_ineq = p.num_ineq();
  const int m = p.num_rows();
  s.a.resize(m, p.num_vars());
  s.a.topRows(p.num_ineq()) = to_dense(p.a_ineq);
  s.a.bottomRows(p.num_eq()) = to_dense(p.a_eq);
  s.b.resize(m);
  s.b.head(p.num_ineq()) = to_eigen(p.b_ineq);
  s.b.tail(p.num_eq()) = to_eigen(p.b_eq);
  return s;
}

inline Eigen::VectorXd stacked_dual(const PrimalDualPoint& z) {
  Eigen::VectorXd y(z.y_ineq.size() + z.y_eq.size());
  y.head(z.y_ineq.size()) = to_eigen(z.y_ineq);
  y.tail(z.y_eq.size()) = to_eigen(z.y_eq);
  return y;
}

inline void require_dense_capable(const QuadraticProgram& p, int cap, const char* what) {
  if (p.num_vars() > cap)
    throw std::invalid_argument(std::string(what) + ": problem exceeds the dense size cap");
}

// v' (I + Q/xi)^{-1} v via a dense symmetric solve.
inline double inv_weighted_sq_norm(const Eigen::MatrixXd& q, double xi, const Eigen::VectorXd& v) {
  Eigen::MatrixXd w = q / xi;
  w.diagonal().array() += 1.0;
  return v.dot(w.ldlt().solve(v));
}

}  // namespace gap_detail

/// Closed form of the smoothed duality gap G_xi(z; center):
///
///   1/2 x'Qx + c'x + b'y
///   + xi/2 ||[y. + (Ax-b)/xi]_+||^2 - xi/2 ||y.||^2
///   + xi/2 ||x. - (c+A'y)/xi||^2_{(I+Q/xi)^{-1}} - xi/2 ||x.||^2
///
/// with (x., y.) the center; equality rows skip the positive-part clamp
/// (their multipliers maximize unconstrained). Requires y_ineq >= 0.
inline double smoothed_gap_closed(const QuadraticProgram& p, const PrimalDualPoint& z,
                                  const SmoothedGapParams& params) {
  gap_detail::require_dense_capable(p, 2000, "smoothed_gap_closed");
  const double xi = params.xi;
  if (xi <= 0.0) throw std::invalid_argument("smoothed gap requires xi > 0");
  for (double v : z.y_ineq)
    if (v < 0.0) return std::numeric_limits<double>::infinity();

  const auto s = gap_detail::stacked(p);
  const Eigen::MatrixXd q = gap_detail::to_dense(p.q);
  const Eigen::VectorXd x = gap_detail::to_eigen(z.x);
  const Eigen::VectorXd y = gap_detail::stacked_dual(z);
  const Eigen::VectorXd xc = gap_detail::to_eigen(params.center.x);
  const Eigen::VectorXd yc = gap_detail::stacked_dual(params.center);
  const Eigen::VectorXd c = gap_detail::to_eigen(p.c);

  double g = 0.5 * x.dot(q * x) + c.dot(x) + s.b.dot(y);

  const Eigen::VectorXd resid = s.a * x - s.b;
  for (int i = 0; i < s.b.size(); ++i) {
    double v = yc[i] + resid[i] / xi;
    if (i < s.num_ineq && v < 0.0) v = 0.0;
    g += 0.5 * xi * v * v - 0.5 * xi * yc[i] * yc[i];
  }

  const Eigen::VectorXd u = xc - (c + s.a.transpose() * y) / xi;
  g += 0.5 * xi * gap_detail::inv_weighted_sq_norm(q, xi, u) - 0.5 * xi * xc.squaredNorm();
  return g;
}

/// Direct maximization of Q(z, z^) - xi/2 ||z^ - center||^2 by projected
/// gradient ascent, run to projected-gradient norm 1e-10. Independent oracle
/// for smoothed_gap_closed; capped at n + m <= 50.
inline double smoothed_gap_bruteforce(const QuadraticProgram& p, const PrimalDualPoint& z,
                                      const SmoothedGapParams& params) {
  if (p.num_vars() + p.num_rows() > 50)
    throw std::invalid_argument("smoothed_gap_bruteforce: instance too large for the oracle");
  const double xi = params.xi;
  if (xi <= 0.0) throw std::invalid_argument("smoothed gap requires xi > 0");

  const auto s = gap_detail::stacked(p);
  const Eigen::MatrixXd q = gap_detail::to_dense(p.q);
  const Eigen::VectorXd x = gap_detail::to_eigen(z.x);
  const Eigen::VectorXd y = gap_detail::stacked_dual(z);
  const Eigen::VectorXd xc = gap_detail::to_eigen(params.center.x);
  const Eigen::VectorXd yc = gap_detail::stacked_dual(params.center);
  const Eigen::VectorXd c = gap_detail::to_eigen(p.c);

  const double norm_q =
      p.num_vars() > 0
          ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().cwiseAbs().maxCoeff()
          : 0.0;
  const double step = 1.0 / (norm_q + xi);

  // phi(x^, y^) = L(x, y^) - L(x^, y) - xi/2 ||x^-xc||^2 - xi/2 ||y^-yc||^2
  const Eigen::VectorXd resid = s.a * x - s.b;   // grad of L(x, y^) in y^
  const Eigen::VectorXd aty = s.a.transpose() * y;
  Eigen::VectorXd xh = xc, yh = yc;

  auto project = [&](Eigen::VectorXd& v) {
    for (int i = 0; i < s.num_ineq; ++i) v[i] = std::max(v[i], 0.0);
  };
  project(yh);

  const long max_steps = 1000000;
  for (long it = 0; it < max_steps; ++it) {
    const Eigen::VectorXd gx = -(q * xh + c + aty) - xi * (xh - xc);
    const Eigen::VectorXd gy = resid - xi * (yh - yc);
    Eigen::VectorXd xn = xh + step * gx;
    Eigen::VectorXd yn = yh + step * gy;
    project(yn);
    const double move = std::sqrt((xn - xh).squaredNorm() + (yn - yh).squaredNorm()) / step;
    xh = xn;
    yh = yn;
    if (move <= 1e-10) {
      const double lx = 0.5 * x.dot(q * x) + c.dot(x) + yh.dot(resid) + yh.dot(s.b) - s.b.dot(yh);
      // L(x, yh) - L(xh, y), written out:
      const double l_x_yh = 0.5 * x.dot(q * x) + c.dot(x) + yh.dot(s.a * x - s.b);
      const double l_xh_y = 0.5 * xh.dot(q * xh) + c.dot(xh) + y.dot(s.a * xh - s.b);
      (void)lx;
      return l_x_yh - l_xh_y - 0.5 * xi * (xh - xc).squaredNorm() -
             0.5 * xi * (yh - yc).squaredNorm();
    }
  }
  throw std::runtime_error("smoothed_gap_bruteforce: ascent did not converge");
}

/// Scaled KKT residual F_xi(z), stacked as
///   ( violation ; (I+Q/xi)^{-1/2} (Qx+c+A'y) ; dual fixed-point residual )
/// of length m + n + m. Zero exactly at optimal points. Inequality rows use
/// the projected forms; equality rows use the unprojected residuals.
inline Vec scaled_kkt_residual(const QuadraticProgram& p, const PrimalDualPoint& z, double xi) {
  gap_detail::require_dense_capable(p, 2000, "scaled_kkt_residual");
  if (xi <= 0.0) throw std::invalid_argument("scaled_kkt_residual requires xi > 0");
  const auto s = gap_detail::stacked(p);
  const Eigen::MatrixXd q = gap_detail::to_dense(p.q);
  const Eigen::VectorXd x = gap_detail::to_eigen(z.x);
  const Eigen::VectorXd y = gap_detail::stacked_dual(z);
  const Eigen::VectorXd c = gap_detail::to_eigen(p.c);
  const int m = static_cast<int>(s.b.size());
  const int n = p.num_vars();

  Vec f(static_cast<std::size_t>(2 * m + n), 0.0);

  const Eigen::VectorXd resid = s.a * x - s.b;
  for (int i = 0; i < m; ++i)
    f[i] = i < s.num_ineq ? std::max(resid[i], 0.0) : resid[i];

  Eigen::MatrixXd w = q / xi;
  w.diagonal().array() += 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
  const Eigen::VectorXd dual_res = q * x + c + s.a.transpose() * y;
  const Eigen::VectorXd scaled =
      eig.eigenvectors() *
      (eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
       (eig.eigenvectors().transpose() * dual_res));
  for (int j = 0; j < n; ++j) f[m + j] = scaled[j];

  for (int i = 0; i < m; ++i) {
    const double drop = y[i] + resid[i] / xi;  // y - (b - Ax)/xi
    if (i < s.num_ineq)
      f[m + n + i] = y[i] - std::max(drop, 0.0);
    else
      f[m + n + i] = y[i] - drop;  // = -resid/xi
  }
  return f;
}

/// One residual bound of Lemma-style gap control: lhs <= rhs must hold.
struct ResidualBound {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double slack = 1e-9) const { return lhs <= rhs + slack * (1.0 + std::fabs(rhs)); }
  double margin() const { return rhs - lhs; }
};

struct ResidualBoundReport {
  double gap = 0.0;  // G_xi(z; z*)
  std::array<ResidualBound, 5> bounds;
  bool all_hold(double slack = 1e-9) const {
    for (const auto& b : bounds)
      if (!b.holds(slack)) return false;
    return true;
  }
};

/// Evaluates the five residual-vs-gap inequalities at z with center z*:
///   ||[Ax-b]_+||^2            <= 2 xi G
///   ||Qx+c+A'y*||^2           <= 2 ||Q|| G
///   ||Qx*+c+A'y||^2_{(I+Q/xi)^{-1}} <= 2 xi G
///   ||y - [y - (b-Ax*)/xi]_+||^2    <= (1/xi) G
///   ||y* - [y* - (b-Ax)/xi]_+||^2   <= (2/xi) G
inline ResidualBoundReport residual_bound_check(const QuadraticProgram& p,
                                                const PrimalDualPoint& z, double xi,
                                                const PrimalDualPoint& z_star) {
  gap_detail::require_dense_capable(p, 2000, "residual_bound_check");
  SmoothedGapParams params{xi, z_star};
  ResidualBoundReport rep;
  rep.gap = smoothed_gap_closed(p, z, params);

  const auto s = gap_detail::stacked(p);
  const Eigen::MatrixXd q = gap_detail::to_dense(p.q);
  const Eigen::VectorXd x = gap_detail::to_eigen(z.x);
  const Eigen::VectorXd y = gap_detail::stacked_dual(z);
  const Eigen::VectorXd xs = gap_detail::to_eigen(z_star.x);
  const Eigen::VectorXd ys = gap_detail::stacked_dual(z_star);
  const Eigen::VectorXd c = gap_detail::to_eigen(p.c);
  const double norm_q =
      p.num_vars() > 0
          ? Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().cwiseAbs().maxCoeff()
          : 0.0;

  const Eigen::VectorXd resid = s.a * x - s.b;
  const Eigen::VectorXd resid_star = s.a * xs - s.b;

  auto clamp_ineq = [&](Eigen::VectorXd v) {
    for (int i = 0; i < s.num_ineq; ++i) v[i] = std::max(v[i], 0.0);
    return v;
  };

  rep.bounds[0] = {"primal", clamp_ineq(resid).squaredNorm(), 2.0 * xi * rep.gap};
  rep.bounds[1] = {"dual_at_ystar", (q * x + c + s.a.transpose() * ys).squaredNorm(),
                   2.0 * norm_q * rep.gap};
  rep.bounds[2] = {"dual_at_xstar",
                   gap_detail::inv_weighted_sq_norm(q, xi, q * xs + c + s.a.transpose() * y),
                   2.0 * xi * rep.gap};

  Eigen::VectorXd comp1(s.b.size()), comp2(s.b.size());
  for (int i = 0; i < s.b.size(); ++i) {
    const double d1 = y[i] + resid_star[i] / xi;
    const double d2 = ys[i] + resid[i] / xi;
    comp1[i] = y[i] - (i < s.num_ineq ? std::max(d1, 0.0) : d1);
    comp2[i] = ys[i] - (i < s.num_ineq ? std::max(d2, 0.0) : d2);
  }
  rep.bounds[3] = {"complementarity_at_xstar", comp1.squaredNorm(), rep.gap / xi};
  rep.bounds[4] = {"complementarity_at_x", comp2.squaredNorm(), 2.0 * rep.gap / xi};
  return rep;
}

}  // namespace rapdhg
