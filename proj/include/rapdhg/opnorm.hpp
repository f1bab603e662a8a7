#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "rapdhg/sparse.hpp"
#include "rapdhg/vec.hpp"

namespace rapdhg {

struct PowerIterOptions {
  int max_iters = 5000;
  double tol = 1e-4;
  std::uint64_t seed = 20240601;
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline Vec random_unit(int n, std::mt19937_64& rng) {
  Vec v(n);
  for (double& x : v) x = 2.0 * uniform01(rng) - 1.0;
  const double nrm = norm2(v);
  if (nrm > 0.0) scale(v, 1.0 / nrm);
  return v;
}

}  // namespace detail

/// Spectral norm of a general matrix via power iteration on M'M, returning
/// sqrt of the dominant Rayleigh quotient. Returns 0 for an all-zero matrix.
inline double estimate_op_norm(const SparseMatrix& m, PowerIterOptions opts = {}) {
  if (m.empty()) return 0.0;
  std::mt19937_64 rng(opts.seed);
  Vec v = detail::random_unit(m.cols(), rng);
  Vec mv, w;
  double lambda = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    m.multiply(v, mv);
    m.multiply_transpose(mv, w);
    const double lambda_next = dot(v, w);  // v'M'Mv with ||v|| = 1
    const double nrm = norm2(w);
    if (nrm == 0.0) {
      // v landed in the nullspace; restart from a fresh direction
      v = detail::random_unit(m.cols(), rng);
      continue;
    }
    v = w;
    scale(v, 1.0 / nrm);
    if (it > 0 && std::fabs(lambda_next - lambda) <= opts.tol * std::fabs(lambda_next)) {
      lambda = lambda_next;
      break;
    }
    lambda = lambda_next;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

/// Spectral norm of a symmetric matrix via power iteration on M itself.
inline double estimate_op_norm_symmetric(const SparseMatrix& m, PowerIterOptions opts = {}) {
  if (m.empty()) return 0.0;
  std::mt19937_64 rng(opts.seed);
  Vec v = detail::random_unit(m.cols(), rng);
  Vec w;
  double lambda = 0.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    m.multiply(v, w);
    const double lambda_next = std::fabs(dot(v, w));
    const double nrm = norm2(w);
    if (nrm == 0.0) {
      v = detail::random_unit(m.cols(), rng);
      continue;
    }
    v = w;
    scale(v, 1.0 / nrm);
    if (it > 0 && std::fabs(lambda_next - lambda) <= opts.tol * std::fabs(lambda_next)) {
      lambda = lambda_next;
      break;
    }
    lambda = lambda_next;
  }
  return lambda;
}

}  // namespace rapdhg
