#pragma once

// Conjugate gradient on A x = b, one recurrence per line:
//
//   d_0 = r_0 = b - A x_0
//   alpha_i   = r_i^T r_i / d_i^T A d_i
//   x_{i+1}   = x_i + alpha_i d_i
//   r_{i+1}   = r_i - alpha_i A d_i
//   beta_{i+1} = r_{i+1}^T r_{i+1} / r_i^T r_i
//   d_{i+1}   = r_{i+1} + beta_{i+1} d_i
//
// alpha makes consecutive residuals orthogonal, beta makes consecutive
// directions A-conjugate. rho_i = r_i^T r_i is computed once per iteration
// and serves as alpha's numerator and the next beta's denominator.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgsolve/error.hpp"
#include "cgsolve/linalg.hpp"

namespace cgsolve {

struct SolverConfig {
  double tol_rel = 1e-10;
  // Unset means 2n.
  std::optional<std::size_t> max_iter;
  double breakdown_eps = 1e-14;
  bool capture_trace = false;
  // Every k-th iteration the recurred residual is replaced by b - A x. 0 = never.
  std::size_t true_residual_check_interval = 0;

  void validate() const {
    if (!(tol_rel > 0.0)) throw InvalidArgument("SolverConfig: tol_rel must be positive");
    if (max_iter && *max_iter < 1) throw InvalidArgument("SolverConfig: max_iter must be at least 1");
    if (!(breakdown_eps >= 0.0)) throw InvalidArgument("SolverConfig: breakdown_eps must be non-negative");
  }

  [[nodiscard]] std::size_t iteration_cap(std::size_t n) const { return max_iter.value_or(2 * n); }
};

struct IterationState {
  std::size_t i = 0;
  Vector x;
  Vector r;
  Vector d;
  double rho = 0.0;  // dot(r, r)
};

enum class StopReason { Converged, MaxIterations, Breakdown, ZeroRhs };

constexpr std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Breakdown: return "breakdown";
    case StopReason::ZeroRhs: return "zero_rhs";
  }
  return "unknown";
}

/// Outcome of one solve.
///
/// residual_norms has iterations + 1 entries, alphas has iterations and betas
/// has max(iterations - 1, 0): the beta computed on the final step only feeds
/// a direction that is never used. trace, when captured, holds the states
/// x_0 .. x_iterations.
struct SolveReport {
  std::size_t iterations = 0;
  StopReason stop_reason = StopReason::MaxIterations;
  Vector x;
  std::vector<double> residual_norms;
  std::vector<double> alphas;
  std::vector<double> betas;
  std::optional<std::vector<IterationState>> trace;
  double tol_rel = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return x.size(); }
};

struct StepResult {
  IterationState state;
  double alpha = 0.0;
  double beta = 0.0;
};

namespace detail {

inline void require_finite(std::span<const double> v, const char* what) {
  if (!all_finite(v)) throw NonFiniteError(std::string(what) + " has non-finite entries");
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteError(std::string(what) + " is not finite");
}

}  // namespace detail

inline IterationState init_state(const LinearSystem& system, std::span<const double> x0) {
  detail::require_same_length(system.size(), x0.size(), "init_state");
  IterationState state;
  state.x.assign(x0.begin(), x0.end());
  state.r = subtract(system.rhs, matvec(system.matrix, x0));
  state.d = state.r;
  state.rho = dot(state.r, state.r);
  detail::require_finite(state.r, "initial residual");
  detail::require_finite(state.rho, "initial r^T r");
  return state;
}

/// rho / (d^T A d), rejecting d^T A d <= breakdown_eps * ||d||^2.
inline double compute_alpha(const IterationState& state, std::span<const double> ad, double breakdown_eps) {
  const double curvature = dot(state.d, ad);
  if (!(curvature > breakdown_eps * dot(state.d, state.d))) {
    throw BreakdownError("d^T A d = " + std::to_string(curvature) + " at iteration " +
                         std::to_string(state.i) + " (operator not SPD?)");
  }
  return state.rho / curvature;
}

inline double compute_beta(double rho_next, double rho) {
  if (rho == 0.0) throw InvalidState("compute_beta: r^T r is zero, iteration should have stopped");
  return rho_next / rho;
}

inline StepResult cg_step_detailed(const IterationState& state, const LinearSystem& system,
                                   const SolverConfig& config) {
  if (!(state.rho > 0.0)) throw InvalidState("cg_step: r^T r must be positive");
  const Vector ad = matvec(system.matrix, state.d);
  StepResult out;
  out.alpha = compute_alpha(state, ad, config.breakdown_eps);

  IterationState& next = out.state;
  next.i = state.i + 1;
  next.x = axpy(out.alpha, state.d, state.x);
  next.r = axpy(-out.alpha, ad, state.r);
  if (config.true_residual_check_interval > 0 && next.i % config.true_residual_check_interval == 0) {
    next.r = subtract(system.rhs, matvec(system.matrix, next.x));
  }
  next.rho = dot(next.r, next.r);
  out.beta = compute_beta(next.rho, state.rho);
  next.d = axpy(out.beta, state.d, next.r);

  detail::require_finite(out.alpha, "alpha");
  detail::require_finite(out.beta, "beta");
  detail::require_finite(next.x, "x");
  detail::require_finite(next.r, "r");
  detail::require_finite(next.d, "d");
  return out;
}

inline IterationState cg_step(const IterationState& state, const LinearSystem& system,
                              const SolverConfig& config) {
  return cg_step_detailed(state, system, config).state;
}

/// One steepest-descent step: the direction is always the current residual
/// and no beta is formed.
inline StepResult steepest_descent_step(const IterationState& state, const LinearSystem& system,
                                        const SolverConfig& config) {
  if (!(state.rho > 0.0)) throw InvalidState("steepest_descent_step: r^T r must be positive");
  const Vector ar = matvec(system.matrix, state.r);
  IterationState current = state;
  current.d = state.r;
  StepResult out;
  out.alpha = compute_alpha(current, ar, config.breakdown_eps);

  IterationState& next = out.state;
  next.i = state.i + 1;
  next.x = axpy(out.alpha, state.r, state.x);
  next.r = axpy(-out.alpha, ar, state.r);
  if (config.true_residual_check_interval > 0 && next.i % config.true_residual_check_interval == 0) {
    next.r = subtract(system.rhs, matvec(system.matrix, next.x));
  }
  next.rho = dot(next.r, next.r);
  next.d = next.r;

  detail::require_finite(out.alpha, "alpha");
  detail::require_finite(next.x, "x");
  detail::require_finite(next.r, "r");
  return out;
}

namespace detail {

template <typename Step>
SolveReport run_loop(const LinearSystem& system, std::span<const double> x0, const SolverConfig& config,
                     bool record_betas, Step&& step) {
  config.validate();
  detail::require_same_length(system.size(), x0.size(), "solve");
  detail::require_finite(x0, "x0");

  const std::size_t n = system.size();
  SolveReport report;
  report.tol_rel = config.tol_rel;
  if (config.capture_trace) report.trace.emplace();

  const double b_norm = norm2(system.rhs);
  if (b_norm == 0.0) {
    IterationState zero;
    zero.x.assign(n, 0.0);
    zero.r.assign(n, 0.0);
    zero.d.assign(n, 0.0);
    report.x = zero.x;
    report.stop_reason = StopReason::ZeroRhs;
    report.residual_norms.push_back(0.0);
    if (report.trace) report.trace->push_back(std::move(zero));
    return report;
  }

  const double threshold = config.tol_rel * b_norm;
  const std::size_t cap = config.iteration_cap(n);
  IterationState state = init_state(system, x0);
  report.residual_norms.push_back(std::sqrt(state.rho));
  if (report.trace) report.trace->push_back(state);

  while (true) {
    if (std::sqrt(state.rho) <= threshold) {
      report.stop_reason = StopReason::Converged;
      break;
    }
    if (state.i >= cap) {
      report.stop_reason = StopReason::MaxIterations;
      break;
    }
    StepResult result;
    try {
      result = step(state);
    } catch (const BreakdownError&) {
      report.stop_reason = StopReason::Breakdown;
      break;
    } catch (const NonFiniteError&) {
      report.stop_reason = StopReason::Breakdown;
      break;
    }
    state = std::move(result.state);
    report.alphas.push_back(result.alpha);
    if (record_betas) report.betas.push_back(result.beta);
    report.residual_norms.push_back(std::sqrt(state.rho));
    if (report.trace) report.trace->push_back(state);
  }

  report.iterations = state.i;
  if (record_betas && report.iterations > 0) report.betas.resize(report.iterations - 1);
  report.x = std::move(state.x);
  return report;
}

}  // namespace detail

/// Conjugate gradient from x0 until ||r|| <= tol_rel * ||b||, the iteration
/// cap, or breakdown. Breakdown and non-finite states end the loop with
/// StopReason::Breakdown instead of throwing, so histories stay inspectable.
inline SolveReport solve(const LinearSystem& system, std::span<const double> x0, const SolverConfig& config = {}) {
  return detail::run_loop(system, x0, config, true,
                          [&](const IterationState& s) { return cg_step_detailed(s, system, config); });
}

inline SolveReport solve(const LinearSystem& system, const SolverConfig& config = {}) {
  return solve(system, Vector(system.size(), 0.0), config);
}

/// Baseline: same loop with d_i = r_i every iteration. betas stays empty.
inline SolveReport steepest_descent_solve(const LinearSystem& system, std::span<const double> x0,
                                          const SolverConfig& config = {}) {
  return detail::run_loop(system, x0, config, false,
                          [&](const IterationState& s) { return steepest_descent_step(s, system, config); });
}

inline SolveReport steepest_descent_solve(const LinearSystem& system, const SolverConfig& config = {}) {
  return steepest_descent_solve(system, Vector(system.size(), 0.0), config);
}

}  // namespace cgsolve
