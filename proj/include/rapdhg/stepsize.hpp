#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rapdhg/vec.hpp"

namespace rapdhg {

/// One inner iteration's parameters: averaging weight beta, extrapolation
/// theta, primal step eta, dual step tau.
struct StepParams {
  double beta = 1.0;
  double theta = 1.0;
  double eta = 0.0;
  double tau = 0.0;
};

/// Accelerated schedule for a fixed inner horizon of K iterations:
///
///   beta_k = (k+2)/2, theta_k = k/(k+1),
///   eta_k  = (k+1) / (2(||Q|| + K||A||)),  tau_k = (k+1) / (2K||A||)
///
/// which satisfies beta_0 = 1, beta_{k+1}-1 = beta_k theta_{k+1},
/// theta_{k+1} = eta_k/eta_{k+1} = tau_k/tau_{k+1}, and
/// 1/eta_k - ||Q||/beta_k - 4||A||^2 tau_k >= 0 for all k < K.
///
/// norm_a = 0 falls back to norm_a := norm_q / K so the steps stay finite
/// (unconstrained problems); callers should log the substitution.
inline StepParams step_schedule_theoretical(int k, int horizon, double norm_q, double norm_a) {
  if (horizon < 1) throw std::invalid_argument("step schedule: horizon must be >= 1");
  if (k < 0 || k >= horizon) throw std::invalid_argument("step schedule: k out of range");
  if (norm_a <= 0.0) norm_a = norm_q / horizon;
  if (norm_a <= 0.0) throw std::invalid_argument("step schedule: both norms are zero");
  StepParams sp;
  sp.beta = 0.5 * (k + 2);
  sp.theta = static_cast<double>(k) / (k + 1);
  sp.eta = (k + 1) / (2.0 * (norm_q + horizon * norm_a));
  sp.tau = (k + 1) / (2.0 * horizon * norm_a);
  return sp;
}

/// Constant steps for vanilla PDHG (beta = 1, theta = 1):
/// eta = 1/(||Q|| + 2||A||), tau = 1/(2||A||), which meets the unified step
/// condition 1/eta - ||Q|| - 4||A||^2 tau >= 0 with equality.
inline StepParams pdhg_constant_steps(double norm_q, double norm_a) {
  if (norm_a <= 0.0) {
    if (norm_q <= 0.0) throw std::invalid_argument("pdhg steps: both norms are zero");
    // No constraint block: a plain gradient step; tau is unused (m = 0).
    return StepParams{1.0, 1.0, 1.0 / norm_q, 0.0};
  }
  return StepParams{1.0, 1.0, 1.0 / (norm_q + 2.0 * norm_a), 1.0 / (2.0 * norm_a)};
}

/// Horizon-free step size of the adaptive mode. The primal step is eta/omega,
/// the dual step eta*omega; this formula is the largest eta satisfying the
/// (single ||A||^2) step condition with beta_k = (k+2)/2, damped by 0.99.
inline double adaptive_eta(int k, double prev_eta, double norm_q, double norm_a, double omega) {
  if (omega <= 0.0) throw std::invalid_argument("adaptive_eta: omega must be positive");
  if (norm_q <= 0.0 && norm_a <= 0.0)
    throw std::invalid_argument("adaptive_eta: both norms are zero");
  const double qw = norm_q / omega;
  if (k == 0) return 1.98 / (qw + std::sqrt(4.0 * norm_a * norm_a + qw * qw));
  const double fresh =
      0.99 * (k + 2) / (qw + std::sqrt(norm_a * norm_a * (k + 2.0) * (k + 2.0) + qw * qw));
  return std::min((1.0 + 1.0 / k) * prev_eta, fresh);
}

constexpr double kZeroNormTol = 1e-10;

/// omega_0 = ||c|| / ||b|| when both norms exceed 1e-10, else 1.
inline double primal_weight_init(const Vec& c, const Vec& b) {
  const double nc = norm2(c);
  const double nb = norm2(b);
  if (nc > kZeroNormTol && nb > kZeroNormTol) return nc / nb;
  return 1.0;
}

/// Log-space interpolation toward the dual/primal movement ratio, applied at
/// each restart: exp(0.2 log(dy/dx) + 0.8 log omega_prev); unchanged when
/// either movement is below 1e-10.
inline double primal_weight_update(double delta_x, double delta_y, double omega_prev) {
  if (omega_prev <= 0.0) throw std::invalid_argument("primal weight must be positive");
  if (delta_x <= kZeroNormTol || delta_y <= kZeroNormTol) return omega_prev;
  constexpr double kTheta = 0.2;
  return std::exp(kTheta * std::log(delta_y / delta_x) + (1.0 - kTheta) * std::log(omega_prev));
}

}  // namespace rapdhg
