#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace rapdhg {

using Vec = std::vector<double>;

// Dense vector kernels used by the solver hot loop. All loops are plain
// sequential accumulation so results are bit-reproducible across runs.

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::fabs(v));
  return m;
}

inline double dist2(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(Vec& x, double alpha) {
  for (double& v : x) v *= alpha;
}

inline void set_zero(Vec& x) { x.assign(x.size(), 0.0); }

// x := max(x, 0) componentwise
inline void project_nonneg(Vec& x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

inline bool all_finite(const Vec& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace rapdhg
