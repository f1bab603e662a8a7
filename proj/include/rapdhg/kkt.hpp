#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rapdhg/problem.hpp"

namespace rapdhg {

struct KktResiduals {
  double r_primal = 0.0;
  double r_dual = 0.0;
  double r_gap = 0.0;

  double relkkt() const { return std::max({r_primal, r_dual, r_gap}); }
};

/// Relative KKT error of a primal-dual point:
///
///   r_primal = ||violation||_inf / (1 + max{||Ax||_inf, ||b||_inf})
///   r_dual   = ||Qx + A'y + c||_inf / (1 + max{||Qx||_inf, ||A'y||_inf, ||c||_inf})
///   r_gap    = |x'Qx + c'x + b'y| / (1 + max{|x'Qx/2 + c'x|, |x'Qx/2 + b'y|})
///
/// where A and b stack the inequality and equality blocks. Inequality rows
/// contribute [Ax - b]_+ to the violation, equality rows |Ax - b|. Requires
/// y_ineq >= 0 (up to 1e-9), matching the dual cone.
inline KktResiduals rel_kkt(const QuadraticProgram& p, const PrimalDualPoint& z) {
  for (double v : z.y_ineq)
    if (v < -1e-9) throw std::invalid_argument("rel_kkt: negative inequality dual");

  Vec ax_i = spmv(p.a_ineq, z.x);
  Vec ax_e = spmv(p.a_eq, z.x);
  Vec qx = spmv(p.q, z.x);
  Vec aty = spmv_t(p.a_ineq, z.y_ineq);
  {
    Vec aty_e = spmv_t(p.a_eq, z.y_eq);
    axpy(1.0, aty_e, aty);
  }

  KktResiduals r;

  double viol = 0.0, ax_inf = 0.0, b_inf = 0.0;
  for (int i = 0; i < p.num_ineq(); ++i) {
    viol = std::max(viol, ax_i[i] - p.b_ineq[i]);
    ax_inf = std::max(ax_inf, std::fabs(ax_i[i]));
    b_inf = std::max(b_inf, std::fabs(p.b_ineq[i]));
  }
  for (int i = 0; i < p.num_eq(); ++i) {
    viol = std::max(viol, std::fabs(ax_e[i] - p.b_eq[i]));
    ax_inf = std::max(ax_inf, std::fabs(ax_e[i]));
    b_inf = std::max(b_inf, std::fabs(p.b_eq[i]));
  }
  r.r_primal = std::max(viol, 0.0) / (1.0 + std::max(ax_inf, b_inf));

  double dual_num = 0.0, qx_inf = 0.0, aty_inf = 0.0, c_inf = 0.0;
  for (int j = 0; j < p.num_vars(); ++j) {
    dual_num = std::max(dual_num, std::fabs(qx[j] + aty[j] + p.c[j]));
    qx_inf = std::max(qx_inf, std::fabs(qx[j]));
    aty_inf = std::max(aty_inf, std::fabs(aty[j]));
    c_inf = std::max(c_inf, std::fabs(p.c[j]));
  }
  r.r_dual = dual_num / (1.0 + std::max({qx_inf, aty_inf, c_inf}));

  const double xqx = dot(z.x, qx);
  const double cx = dot(p.c, z.x);
  const double by = dot(p.b_ineq, z.y_ineq) + dot(p.b_eq, z.y_eq);
  r.r_gap = std::fabs(xqx + cx + by) /
            (1.0 + std::max(std::fabs(0.5 * xqx + cx), std::fabs(0.5 * xqx + by)));

  return r;
}

}  // namespace rapdhg
