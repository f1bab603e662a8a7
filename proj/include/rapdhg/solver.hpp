#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rapdhg/kkt.hpp"
#include "rapdhg/opnorm.hpp"
#include "rapdhg/problem.hpp"
#include "rapdhg/scaling.hpp"
#include "rapdhg/sparse.hpp"
#include "rapdhg/stepsize.hpp"
#include "rapdhg/vec.hpp"

namespace rapdhg {

enum class Algorithm { kPdhg, kApdhg };
enum class RestartPolicy { kNone, kFixed, kAdaptiveHalving, kPdqpAdaptive };
enum class StepRule { kTheoretical, kAdaptive };
enum class PrimalWeightMode { kFixed, kAdaptive };
enum class SolveStatus { kOptimal, kIterationLimit, kTimeLimit, kNumericalError };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kIterationLimit: return "iteration_limit";
    case SolveStatus::kTimeLimit: return "time_limit";
    case SolveStatus::kNumericalError: return "numerical_error";
  }
  return "unknown";
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::kApdhg;
  RestartPolicy restart = RestartPolicy::kPdqpAdaptive;
  long restart_length = 0;  // K, required for RestartPolicy::kFixed
  StepRule step_rule = StepRule::kAdaptive;
  PrimalWeightMode primal_weight = PrimalWeightMode::kAdaptive;
  double fixed_primal_weight = 1.0;
  double tol = 1e-3;
  long max_iters = 200000;
  double time_limit_s = std::numeric_limits<double>::infinity();
  int check_interval = 40;
  bool scaling = true;
  std::uint64_t seed = 1;

  // Diagnostics: record the unscaled average every snapshot_interval
  // iterations, and the unscaled epoch-start point at every restart.
  long snapshot_interval = 0;
  bool record_restart_points = false;

  void validate() const {
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    if (restart == RestartPolicy::kFixed && restart_length < 1)
      throw std::invalid_argument("fixed restart requires restart_length >= 1");
    if (check_interval < 1) throw std::invalid_argument("check_interval must be >= 1");
    if (max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  }
};

struct LogRecord {
  long iteration = 0;
  double r_primal = 0.0;
  double r_dual = 0.0;
  double r_gap = 0.0;
  double eta = 0.0;
  double omega = 1.0;
  bool restarted = false;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kIterationLimit;
  PrimalDualPoint point;   // unscaled, reported against the original problem
  KktResiduals residuals;  // of `point` on the original problem
  long iterations = 0;
  long restarts = 0;
  double solve_seconds = 0.0;
  double norm_q = 0.0;  // estimates used for the step sizes (after safety factor)
  double norm_a = 0.0;
  bool norm_fallback = false;  // ||A|| = 0 substitution in the schedule
  std::vector<LogRecord> log;
  std::vector<std::pair<long, PrimalDualPoint>> snapshots;
  std::vector<PrimalDualPoint> restart_points;
};

/// The problem as the inner loop sees it: the two constraint blocks stacked
/// into one matrix so each iteration is one A product, one A' product and one
/// Q product. The first num_ineq dual coordinates are projected to >= 0.
struct WorkingProblem {
  SparseMatrix q;
  SparseMatrix a;
  Vec b;
  Vec c;
  int num_ineq = 0;

  static WorkingProblem from(const QuadraticProgram& p) {
    WorkingProblem wp;
    wp.q = p.q;
    wp.c = p.c;
    wp.num_ineq = p.num_ineq();
    std::vector<Triplet> t = p.a_ineq.triplets();
    p.a_eq.for_each([&](int r, int c, double v) { t.push_back({wp.num_ineq + r, c, v}); });
    wp.a = SparseMatrix(p.num_rows(), p.num_vars(), std::move(t));
    wp.b = p.b_ineq;
    wp.b.insert(wp.b.end(), p.b_eq.begin(), p.b_eq.end());
    return wp;
  }

  PrimalDualPoint split(const Vec& x, const Vec& y) const {
    PrimalDualPoint z;
    z.x = x;
    z.y_ineq.assign(y.begin(), y.begin() + num_ineq);
    z.y_eq.assign(y.begin() + num_ineq, y.end());
    return z;
  }
};

/// Live state of the inner loop: iterate, previous iterate, dual, running
/// averages, inner counter k and outer (restart) counter n.
struct IterateState {
  Vec x;
  Vec x_prev;
  Vec y;
  Vec x_bar;
  Vec y_bar;
  long k = 0;
  long n = 0;

  static IterateState zeros(int num_vars, int num_rows) {
    IterateState s;
    s.x.assign(num_vars, 0.0);
    s.x_prev.assign(num_vars, 0.0);
    s.y.assign(num_rows, 0.0);
    s.x_bar.assign(num_vars, 0.0);
    s.y_bar.assign(num_rows, 0.0);
    return s;
  }
};

struct StepWorkspace {
  Vec w;    // extrapolated primal point, then x_md
  Vec aw;   // A * w
  Vec qx;   // Q * x_md
  Vec aty;  // A' * y_new
};

/// One unified inner iteration:
///   y+ = proj(y + tau (A(theta (x - x_prev) + x) - b))   (first num_ineq coords)
///   x+ = x - eta (Q x_md + c + A' y+),  x_md = (1 - 1/beta) x_bar + x/beta
/// followed by the beta-weighted average updates and the x_prev shift.
inline void inner_step_inplace(IterateState& s, const WorkingProblem& wp, const StepParams& sp,
                               StepWorkspace& ws) {
  const std::size_t n = s.x.size();
  const std::size_t m = s.y.size();
  const double inv_beta = 1.0 / sp.beta;

  ws.w.resize(n);
  for (std::size_t j = 0; j < n; ++j) ws.w[j] = sp.theta * (s.x[j] - s.x_prev[j]) + s.x[j];
  wp.a.multiply(ws.w, ws.aw);

  for (std::size_t i = 0; i < m; ++i) s.y[i] += sp.tau * (ws.aw[i] - wp.b[i]);
  for (int i = 0; i < wp.num_ineq; ++i) s.y[i] = s.y[i] > 0.0 ? s.y[i] : 0.0;

  for (std::size_t j = 0; j < n; ++j) ws.w[j] = (1.0 - inv_beta) * s.x_bar[j] + inv_beta * s.x[j];
  wp.q.multiply(ws.w, ws.qx);
  wp.a.multiply_transpose(s.y, ws.aty);

  std::swap(s.x, s.x_prev);  // s.x_prev now holds the pre-step x
  for (std::size_t j = 0; j < n; ++j)
    s.x[j] = s.x_prev[j] - sp.eta * (ws.qx[j] + wp.c[j] + ws.aty[j]);

  for (std::size_t j = 0; j < n; ++j) s.x_bar[j] = (1.0 - inv_beta) * s.x_bar[j] + inv_beta * s.x[j];
  for (std::size_t i = 0; i < m; ++i) s.y_bar[i] = (1.0 - inv_beta) * s.y_bar[i] + inv_beta * s.y[i];
  ++s.k;
}

inline IterateState inner_step(IterateState s, const WorkingProblem& wp, const StepParams& sp) {
  StepWorkspace ws;
  inner_step_inplace(s, wp, sp, ws);
  return s;
}

inline IterateState inner_step(const IterateState& s, const QuadraticProgram& p,
                               const StepParams& sp) {
  return inner_step(s, WorkingProblem::from(p), sp);
}

/// Vanilla PDHG: the unified step with beta = 1 (averages track the iterate)
/// and theta = 1 (extrapolated point 2x - x_prev).
inline IterateState pdhg_step(const IterateState& s, const WorkingProblem& wp, double eta,
                              double tau) {
  return inner_step(s, wp, StepParams{1.0, 1.0, eta, tau});
}

inline IterateState pdhg_step(const IterateState& s, const QuadraticProgram& p, double eta,
                              double tau) {
  return pdhg_step(s, WorkingProblem::from(p), eta, tau);
}

/// Inputs of a restart decision at a termination check.
struct RestartContext {
  double relkkt_candidate = 0.0;       // relKKT of the restart candidate
  double relkkt_candidate_prev = 0.0;  // previous candidate this epoch (inf if first)
  double relkkt_epoch_start = 0.0;     // relKKT(z^{n,0})
  long k = 0;                          // inner iterations this epoch
  long total_iters = 0;                // cumulative iterations across epochs
};

constexpr double kRestartSufficient = 0.2;
constexpr double kRestartNecessary = 0.8;
constexpr double kRestartArtificial = 0.36;

inline bool restart_decision(RestartPolicy policy, const RestartContext& ctx,
                             long fixed_length = 0) {
  switch (policy) {
    case RestartPolicy::kNone:
      return false;
    case RestartPolicy::kFixed:
      return ctx.k >= fixed_length;
    case RestartPolicy::kAdaptiveHalving:
      return ctx.relkkt_candidate <= 0.5 * ctx.relkkt_epoch_start;
    case RestartPolicy::kPdqpAdaptive:
      if (ctx.relkkt_candidate <= kRestartSufficient * ctx.relkkt_epoch_start) return true;
      if (ctx.relkkt_candidate <= kRestartNecessary * ctx.relkkt_epoch_start &&
          ctx.relkkt_candidate > ctx.relkkt_candidate_prev)
        return true;
      return ctx.k >= kRestartArtificial * static_cast<double>(ctx.total_iters);
  }
  return false;
}

/// Picks the current iterate or the running average, whichever has smaller
/// relKKT; ties go to the average.
inline PrimalDualPoint get_restart_candidate(const PrimalDualPoint& current,
                                             const PrimalDualPoint& average,
                                             const QuadraticProgram& p) {
  const double r_cur = rel_kkt(p, current).relkkt();
  const double r_avg = rel_kkt(p, average).relkkt();
  return r_cur < r_avg ? current : average;
}

namespace detail {

struct Candidate {
  PrimalDualPoint point;  // unscaled
  KktResiduals res;
  bool is_average = false;
};

inline Candidate evaluate_candidate(const QuadraticProgram& original, const WorkingProblem& wp,
                                    const IterateState& s, const ScalingInfo& scal) {
  Candidate cur, avg;
  cur.point = unscale_point(wp.split(s.x, s.y), scal);
  cur.res = rel_kkt(original, cur.point);
  avg.point = unscale_point(wp.split(s.x_bar, s.y_bar), scal);
  avg.res = rel_kkt(original, avg.point);
  avg.is_average = true;
  return cur.res.relkkt() < avg.res.relkkt() ? cur : avg;
}

}  // namespace detail

/// Solves a canonical QP. Optionally rescales, estimates the operator norms,
/// then runs the configured variant of the unified primal-dual loop. Progress
/// is always measured by relKKT of the unscaled candidate on the original
/// problem, every check_interval iterations and at every restart.
inline SolveResult solve(const QuadraticProgram& original, const SolverConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t_start).count(); };

  original.validate();
  cfg.validate();

  SolveResult result;
  const ScalingInfo scal =
      cfg.scaling ? compute_scaling(original) : ScalingInfo::identity(original);
  const QuadraticProgram scaled = cfg.scaling ? apply_scaling(original, scal) : original;
  const WorkingProblem wp = WorkingProblem::from(scaled);

  PowerIterOptions pi;
  pi.seed = cfg.seed;
  const double norm_q = 1.01 * estimate_op_norm_symmetric(wp.q, pi);
  const double norm_a = 1.01 * estimate_op_norm(wp.a, pi);
  result.norm_q = norm_q;
  result.norm_a = norm_a;

  IterateState state = IterateState::zeros(scaled.num_vars(), scaled.num_rows());
  StepWorkspace ws;

  double omega = 1.0;
  if (cfg.primal_weight == PrimalWeightMode::kAdaptive)
    omega = primal_weight_init(wp.c, wp.b);
  else
    omega = cfg.fixed_primal_weight;

  // Horizon of the theoretical schedule: the restart length for fixed
  // restarts, the full budget when never restarting, and a doubling epoch cap
  // for the adaptive policies (an epoch that reaches the cap is restarted).
  long horizon = 1;
  const bool theoretical = cfg.step_rule == StepRule::kTheoretical;
  const bool accelerated = cfg.algorithm == Algorithm::kApdhg;
  if (theoretical && accelerated) {
    if (cfg.restart == RestartPolicy::kFixed)
      horizon = cfg.restart_length;
    else if (cfg.restart == RestartPolicy::kNone)
      horizon = std::max<long>(cfg.max_iters, 1);
    else
      horizon = std::max<long>(4 * cfg.check_interval, 2);
  }
  result.norm_fallback = norm_a <= 0.0;

  double eta = 0.0;       // adaptive-rule step scale, reset each epoch
  double prev_eta = 0.0;  // eta of the previous inner iteration

  detail::Candidate cand = detail::evaluate_candidate(original, wp, state, scal);
  detail::Candidate best = cand;
  double epoch_start_relkkt = cand.res.relkkt();
  double prev_candidate_relkkt = std::numeric_limits<double>::infinity();
  Vec epoch_prev_x = state.x, epoch_prev_y = state.y;  // scaled z^{n-1,0}

  auto current_eta = [&](const StepParams& sp) { return theoretical ? sp.eta : eta; };

  result.log.push_back({0, cand.res.r_primal, cand.res.r_dual, cand.res.r_gap, 0.0, omega, false});
  if (cfg.record_restart_points) result.restart_points.push_back(cand.point);

  auto finish = [&](SolveStatus status, const detail::Candidate& c, long iters) {
    result.status = status;
    result.point = c.point;
    result.residuals = c.res;
    result.iterations = iters;
    result.solve_seconds = elapsed();
    return result;
  };

  if (cand.res.relkkt() <= cfg.tol) return finish(SolveStatus::kOptimal, cand, 0);
  if (norm_q <= 0.0 && norm_a <= 0.0)
    return finish(SolveStatus::kIterationLimit, best, 0);  // no usable step direction

  StepParams sp;
  for (long t = 1; t <= cfg.max_iters; ++t) {
    const long k = state.k;
    if (theoretical) {
      if (accelerated) {
        sp = step_schedule_theoretical(static_cast<int>(std::min<long>(k, horizon - 1)),
                                       static_cast<int>(horizon), norm_q, norm_a);
      } else {
        sp = pdhg_constant_steps(norm_q, norm_a);
      }
    } else {
      if (accelerated) {
        eta = adaptive_eta(static_cast<int>(k), prev_eta, norm_q, norm_a, omega);
        sp.beta = 0.5 * (k + 2);
        sp.theta = static_cast<double>(k) / (k + 1);
      } else {
        if (k == 0) eta = adaptive_eta(0, 0.0, norm_q, norm_a, omega);
        sp.beta = 1.0;
        sp.theta = 1.0;
      }
      prev_eta = eta;
      sp.eta = eta / omega;
      sp.tau = eta * omega;
    }

    inner_step_inplace(state, wp, sp, ws);

    if (!all_finite(state.x) || !all_finite(state.y))
      return finish(SolveStatus::kNumericalError, best, t);

    const bool horizon_hit = theoretical && accelerated && cfg.restart != RestartPolicy::kNone &&
                             state.k >= horizon;
    const bool fixed_due = cfg.restart == RestartPolicy::kFixed && state.k >= cfg.restart_length;
    const bool snapshot_due = cfg.snapshot_interval > 0 && t % cfg.snapshot_interval == 0;
    const bool check_due = t % cfg.check_interval == 0 || fixed_due || horizon_hit ||
                           snapshot_due || t == cfg.max_iters;
    if (!check_due) continue;

    cand = detail::evaluate_candidate(original, wp, state, scal);
    if (cand.res.relkkt() < best.res.relkkt()) best = cand;

    if (snapshot_due)
      result.snapshots.emplace_back(t, unscale_point(wp.split(state.x_bar, state.y_bar), scal));

    if (cand.res.relkkt() <= cfg.tol) {
      result.log.push_back(
          {t, cand.res.r_primal, cand.res.r_dual, cand.res.r_gap, current_eta(sp), omega, false});
      return finish(SolveStatus::kOptimal, cand, t);
    }
    if (elapsed() > cfg.time_limit_s) {
      result.log.push_back(
          {t, cand.res.r_primal, cand.res.r_dual, cand.res.r_gap, current_eta(sp), omega, false});
      return finish(SolveStatus::kTimeLimit, best, t);
    }

    // Restart decision. The halving policy watches the running average (the
    // point it restarts from); the PDQP policy watches the better candidate.
    bool do_restart = false;
    bool restart_from_average = true;
    if (cfg.restart != RestartPolicy::kNone) {
      RestartContext ctx;
      ctx.relkkt_candidate_prev = prev_candidate_relkkt;
      ctx.relkkt_epoch_start = epoch_start_relkkt;
      ctx.k = state.k;
      ctx.total_iters = t;
      switch (cfg.restart) {
        case RestartPolicy::kFixed:
          do_restart = fixed_due;
          break;
        case RestartPolicy::kAdaptiveHalving: {
          const KktResiduals avg_res =
              cand.is_average ? cand.res
                              : rel_kkt(original, unscale_point(wp.split(state.x_bar, state.y_bar), scal));
          ctx.relkkt_candidate = avg_res.relkkt();
          do_restart = restart_decision(cfg.restart, ctx);
          break;
        }
        case RestartPolicy::kPdqpAdaptive:
          ctx.relkkt_candidate = cand.res.relkkt();
          do_restart = restart_decision(cfg.restart, ctx) || horizon_hit;
          restart_from_average = cand.is_average;
          break;
        default:
          break;
      }
      if (horizon_hit) do_restart = true;
      prev_candidate_relkkt = cand.res.relkkt();
    }

    result.log.push_back(
        {t, cand.res.r_primal, cand.res.r_dual, cand.res.r_gap, current_eta(sp), omega, do_restart});

    if (!do_restart) continue;

    // Restart: z^{n+1,0} is the average for the theoretical policies and the
    // restart candidate for the PDQP policy; x^{n,-1} := x^{n,0}.
    if (horizon_hit && !fixed_due) horizon *= 2;
    if (restart_from_average) {
      state.x = state.x_bar;
      state.y = state.y_bar;
    }
    state.x_prev = state.x;
    state.x_bar = state.x;
    state.y_bar = state.y;
    state.k = 0;
    state.n += 1;
    result.restarts += 1;
    prev_eta = 0.0;

    if (cfg.primal_weight == PrimalWeightMode::kAdaptive) {
      const double dx = dist2(state.x, epoch_prev_x);
      const double dy = dist2(state.y, epoch_prev_y);
      omega = primal_weight_update(dx, dy, omega);
    }
    epoch_prev_x = state.x;
    epoch_prev_y = state.y;
    // relKKT of the new epoch start: the candidate we restarted from.
    epoch_start_relkkt = restart_from_average && !cand.is_average
                             ? rel_kkt(original, unscale_point(wp.split(state.x, state.y), scal)).relkkt()
                             : cand.res.relkkt();
    prev_candidate_relkkt = std::numeric_limits<double>::infinity();
    if (cfg.record_restart_points)
      result.restart_points.push_back(unscale_point(wp.split(state.x, state.y), scal));
  }

  return finish(SolveStatus::kIterationLimit, best, cfg.max_iters);
}

}  // namespace rapdhg
