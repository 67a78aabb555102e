#pragma once

// Post-hoc checks of the identities CG relies on, measured over a captured
// solve trace. Each check is a pure function of (trace, system).
//
//   residual_orthogonality  r_i^T r_{i+1} = 0
//   direction_conjugacy     d_i^T A d_{i+1} = 0
//   alpha_forms             r_i^T A d_i = d_i^T A d_i
//   beta_forms              -d_i^T A r_{i+1} / d_i^T A d_i
//                           = (1/alpha_i) r_{i+1}^T r_{i+1} / d_i^T A d_i
//                           = r_{i+1}^T r_{i+1} / r_i^T r_i
//   scalar_symmetry         d_i^T A r_{i+1} = r_{i+1}^T A d_i
//   error_relation          r_i = -A e_i  and  e_{i+1} = e_i + alpha_i d_i
//
// Every violation is normalized (by rho_0, d_0^T A d_0, ||b||, ...) so that a
// scaled system (cA, cb) passes or fails like the original. The one absolute
// quantity is the scalar-symmetry floor: pairs whose magnitude is below it are
// treated as agreeing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cgsolve/direct_solve.hpp"
#include "cgsolve/error.hpp"
#include "cgsolve/linalg.hpp"
#include "cgsolve/solver.hpp"

namespace cgsolve {

inline constexpr double kOrthogonalityThreshold = 1e-8;
inline constexpr double kConjugacyThreshold = 1e-8;
inline constexpr double kAlphaFormsThreshold = 1e-10;
inline constexpr double kBetaFormsThreshold = 1e-8;
inline constexpr double kScalarSymmetryThreshold = 1e-12;
inline constexpr double kScalarSymmetryFloor = 1e-14;
inline constexpr double kErrorRelationThreshold = 1e-10;
inline constexpr double kErrorRecurrenceThreshold = 1e-12;
// rho_{i+1} <= this * rho_0 counts as converged to the noise floor.
inline constexpr double kNoiseFloorRatio = 1e-28;

enum class CheckStatus { Pass, Fail, Skipped, NotRun };

constexpr std::string_view to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
    case CheckStatus::NotRun: return "not_run";
  }
  return "unknown";
}

struct CheckLeg {
  std::string name;
  double violation = 0.0;
  double threshold = 0.0;
  bool pass = true;
};

/// One row of an InvariantReport. For multi-leg checks the headline
/// violation/threshold are those of the first leg and the check passes only if
/// every leg does.
struct CheckEntry {
  std::string name;
  double violation = 0.0;
  double threshold = 0.0;
  std::string normalization;
  std::optional<std::size_t> worst_iteration;
  CheckStatus status = CheckStatus::Pass;
  std::vector<CheckLeg> legs;
  std::size_t evaluated = 0;
  std::size_t skipped_indices = 0;

  [[nodiscard]] bool passed() const noexcept { return status == CheckStatus::Pass; }
};

struct InvariantReport {
  std::vector<CheckEntry> entries;

  // True iff every check that was actually evaluated passed.
  [[nodiscard]] bool all_passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) {
      return e.status == CheckStatus::Pass || e.status == CheckStatus::Skipped ||
             e.status == CheckStatus::NotRun;
    });
  }

  [[nodiscard]] const CheckEntry* find(std::string_view name) const {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }
};

/// Exact solution and the per-state errors e_i = x_i - x_exact.
struct TrueSolutionProbe {
  Vector x_exact;
  std::vector<Vector> errors;
};

/// The three algebraically equivalent values of beta_{i+1}.
struct BetaForms {
  double from_conjugacy = 0.0;       // -d_i^T A r_{i+1} / d_i^T A d_i
  double from_step_size = 0.0;       // (1/alpha_i) r_{i+1}^T r_{i+1} / d_i^T A d_i
  double from_residual_ratio = 0.0;  // r_{i+1}^T r_{i+1} / r_i^T r_i
};

namespace detail {

inline std::span<const IterationState> trace_of(const SolveReport& report, std::size_t min_states,
                                                const char* check) {
  if (!report.trace) throw InvalidArgument(std::string(check) + ": solve report carries no trace");
  if (report.trace->size() < min_states) {
    throw InvalidArgument(std::string(check) + ": trace needs at least " + std::to_string(min_states) +
                          " states");
  }
  return *report.trace;
}

inline double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Tracks the worst normalized violation over iteration indices.
struct Worst {
  double value = 0.0;
  std::optional<std::size_t> index;

  void offer(double v, std::size_t i) {
    if (std::isnan(value)) return;  // a NaN violation is final
    if (!index || std::isnan(v) || v > value) {
      value = v;
      index = i;
    }
  }
};

inline CheckEntry single_leg(std::string name, std::string normalization, double threshold, const Worst& worst,
                             std::size_t evaluated, std::size_t skipped) {
  CheckEntry e;
  e.name = std::move(name);
  e.normalization = std::move(normalization);
  e.threshold = threshold;
  e.violation = worst.value;
  e.worst_iteration = worst.index;
  e.evaluated = evaluated;
  e.skipped_indices = skipped;
  e.status = worst.value <= threshold ? CheckStatus::Pass : CheckStatus::Fail;
  return e;
}

}  // namespace detail

inline CheckEntry check_residual_orthogonality(const SolveReport& report) {
  const auto states = detail::trace_of(report, 2, "residual_orthogonality");
  const double rho0 = states.front().rho;
  detail::Worst worst;
  std::size_t evaluated = 0, skipped = 0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    if (states[i + 1].rho <= kNoiseFloorRatio * rho0) {
      ++skipped;
      continue;
    }
    ++evaluated;
    worst.offer(std::abs(dot(states[i].r, states[i + 1].r)) / rho0, i);
  }
  return detail::single_leg("residual_orthogonality", "r_0^T r_0", kOrthogonalityThreshold, worst, evaluated,
                            skipped);
}

inline CheckEntry check_direction_conjugacy(const SolveReport& report, const Operator& a) {
  const auto states = detail::trace_of(report, 2, "direction_conjugacy");
  const double curvature0 = dot(states.front().d, matvec(a, states.front().d));
  detail::Worst worst;
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    ++evaluated;
    worst.offer(std::abs(dot(states[i].d, matvec(a, states[i + 1].d))) / curvature0, i);
  }
  return detail::single_leg("direction_conjugacy", "d_0^T A d_0", kConjugacyThreshold, worst, evaluated, 0);
}

inline CheckEntry check_alpha_forms(const SolveReport& report, const Operator& a,
                                    double breakdown_eps = SolverConfig{}.breakdown_eps) {
  const auto states = detail::trace_of(report, 2, "alpha_forms");
  detail::Worst worst;
  std::size_t evaluated = 0, skipped = 0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    const Vector ad = matvec(a, states[i].d);
    const double curvature = dot(states[i].d, ad);
    if (!(std::abs(curvature) > breakdown_eps * dot(states[i].d, states[i].d))) {
      ++skipped;
      continue;
    }
    ++evaluated;
    worst.offer(std::abs(dot(states[i].r, ad) - curvature) / std::abs(curvature), i);
  }
  return detail::single_leg("alpha_forms", "|d_i^T A d_i|", kAlphaFormsThreshold, worst, evaluated, skipped);
}

/// beta_{i+1} three ways from consecutive states and the recorded alpha_i.
/// Zero denominators yield a non-finite component.
inline BetaForms beta_forms_at(const IterationState& current, const IterationState& next, double alpha,
                               const Operator& a) {
  const Vector ad = matvec(a, current.d);
  const double curvature = dot(current.d, ad);
  BetaForms forms;
  forms.from_conjugacy = -dot(current.d, matvec(a, next.r)) / curvature;
  forms.from_step_size = next.rho / (alpha * curvature);
  forms.from_residual_ratio = next.rho / current.rho;
  return forms;
}

inline CheckEntry check_beta_forms(const SolveReport& report, const Operator& a,
                                   double breakdown_eps = SolverConfig{}.breakdown_eps) {
  const auto states = detail::trace_of(report, 2, "beta_forms");
  if (report.alphas.size() + 1 < states.size()) {
    throw InvalidArgument("beta_forms: alpha history shorter than the trace");
  }
  const double rho0 = states.front().rho;
  detail::Worst conj_step, conj_ratio, step_ratio;
  std::size_t evaluated = 0, skipped = 0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    const auto& cur = states[i];
    const auto& next = states[i + 1];
    const double curvature = dot(cur.d, matvec(a, cur.d));
    const bool degenerate = !(std::abs(curvature) > breakdown_eps * dot(cur.d, cur.d)) || cur.rho == 0.0 ||
                            report.alphas[i] == 0.0;
    if (degenerate || next.rho <= kNoiseFloorRatio * rho0) {
      ++skipped;
      continue;
    }
    ++evaluated;
    const BetaForms f = beta_forms_at(cur, next, report.alphas[i], a);
    conj_step.offer(detail::relative_gap(f.from_conjugacy, f.from_step_size), i);
    conj_ratio.offer(detail::relative_gap(f.from_conjugacy, f.from_residual_ratio), i);
    step_ratio.offer(detail::relative_gap(f.from_step_size, f.from_residual_ratio), i);
  }

  CheckEntry e;
  e.name = "beta_forms";
  e.normalization = "max pairwise relative";
  e.threshold = kBetaFormsThreshold;
  e.evaluated = evaluated;
  e.skipped_indices = skipped;
  const auto leg = [](std::string name, const detail::Worst& w) {
    return CheckLeg{std::move(name), w.value, kBetaFormsThreshold, w.value <= kBetaFormsThreshold};
  };
  e.legs = {leg("conjugacy_vs_step_size", conj_step), leg("conjugacy_vs_residual_ratio", conj_ratio),
            leg("step_size_vs_residual_ratio", step_ratio)};
  const detail::Worst* overall = &conj_step;
  for (const auto* w : {&conj_ratio, &step_ratio}) {
    if (w->value > overall->value) overall = w;
  }
  e.violation = overall->value;
  e.worst_iteration = overall->index;
  const bool ok = std::all_of(e.legs.begin(), e.legs.end(), [](const CheckLeg& l) { return l.pass; });
  e.status = ok ? CheckStatus::Pass : CheckStatus::Fail;
  return e;
}

inline CheckEntry check_scalar_symmetry(const SolveReport& report, const Operator& a) {
  const auto states = detail::trace_of(report, 2, "scalar_symmetry");
  detail::Worst worst;
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    const double lhs = dot(states[i].d, matvec(a, states[i + 1].r));
    const double rhs = dot(states[i + 1].r, matvec(a, states[i].d));
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    ++evaluated;
    worst.offer(scale <= kScalarSymmetryFloor ? 0.0 : std::abs(lhs - rhs) / scale, i);
  }
  return detail::single_leg("scalar_symmetry", "max(|lhs|, |rhs|)", kScalarSymmetryThreshold, worst, evaluated,
                            0);
}

inline TrueSolutionProbe build_probe(const SolveReport& report, const LinearSystem& system) {
  const auto states = detail::trace_of(report, 1, "error_relation");
  TrueSolutionProbe probe;
  probe.x_exact = direct_solve(system);
  probe.errors.reserve(states.size());
  for (const auto& s : states) probe.errors.push_back(subtract(s.x, probe.x_exact));
  return probe;
}

/// Needs only one state. Reported NotRun when the oracle finds the operator
/// singular.
inline CheckEntry check_error_relation(const SolveReport& report, const LinearSystem& system) {
  const auto states = detail::trace_of(report, 1, "error_relation");
  CheckEntry e;
  e.name = "error_relation";
  e.normalization = "||b||, ||e_0||";
  e.threshold = kErrorRelationThreshold;

  const double b_norm = norm2(system.rhs);
  if (b_norm == 0.0) {
    e.status = CheckStatus::Skipped;
    return e;
  }
  TrueSolutionProbe probe;
  try {
    probe = build_probe(report, system);
  } catch (const SingularMatrix&) {
    e.status = CheckStatus::NotRun;
    return e;
  }

  detail::Worst residual_leg;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const Vector gap = axpy(1.0, matvec(system.matrix, probe.errors[i]), states[i].r);
    residual_leg.offer(norm2(gap) / b_norm, i);
  }
  detail::Worst recurrence_leg;
  const double e0_norm = norm2(probe.errors.front());
  for (std::size_t i = 0; i + 1 < states.size() && i < report.alphas.size(); ++i) {
    const Vector predicted = axpy(report.alphas[i], states[i].d, probe.errors[i]);
    const double gap = norm2(subtract(probe.errors[i + 1], predicted));
    recurrence_leg.offer(e0_norm == 0.0 ? gap : gap / e0_norm, i);
  }

  e.evaluated = states.size();
  e.violation = residual_leg.value;
  e.worst_iteration = residual_leg.index;
  e.legs = {CheckLeg{"residual_vs_error", residual_leg.value, kErrorRelationThreshold,
                     residual_leg.value <= kErrorRelationThreshold},
            CheckLeg{"error_recurrence", recurrence_leg.value, kErrorRecurrenceThreshold,
                     recurrence_leg.value <= kErrorRecurrenceThreshold}};
  e.status = e.legs[0].pass && e.legs[1].pass ? CheckStatus::Pass : CheckStatus::Fail;
  return e;
}

/// Runs all six checks over an already captured trace. Checks that need two
/// states are reported Skipped when the solve stopped before its first step.
inline InvariantReport check_all(const SolveReport& report, const LinearSystem& system,
                                 double breakdown_eps = SolverConfig{}.breakdown_eps) {
  const auto states = detail::trace_of(report, 1, "check_all");
  InvariantReport out;
  const auto skipped = [](std::string name, double threshold) {
    CheckEntry e;
    e.name = std::move(name);
    e.threshold = threshold;
    e.status = CheckStatus::Skipped;
    return e;
  };
  if (states.size() >= 2) {
    out.entries.push_back(check_residual_orthogonality(report));
    out.entries.push_back(check_direction_conjugacy(report, system.matrix));
    out.entries.push_back(check_alpha_forms(report, system.matrix, breakdown_eps));
    out.entries.push_back(check_beta_forms(report, system.matrix, breakdown_eps));
    out.entries.push_back(check_scalar_symmetry(report, system.matrix));
  } else {
    out.entries.push_back(skipped("residual_orthogonality", kOrthogonalityThreshold));
    out.entries.push_back(skipped("direction_conjugacy", kConjugacyThreshold));
    out.entries.push_back(skipped("alpha_forms", kAlphaFormsThreshold));
    out.entries.push_back(skipped("beta_forms", kBetaFormsThreshold));
    out.entries.push_back(skipped("scalar_symmetry", kScalarSymmetryThreshold));
  }
  out.entries.push_back(check_error_relation(report, system));
  return out;
}

struct Diagnosis {
  SolveReport solve;
  InvariantReport invariants;
};

/// Solve with trace capture forced on, then check every identity.
inline Diagnosis diagnose(const LinearSystem& system, std::span<const double> x0, SolverConfig config = {}) {
  config.capture_trace = true;
  Diagnosis out;
  out.solve = solve(system, x0, config);
  out.invariants = check_all(out.solve, system, config.breakdown_eps);
  return out;
}

inline InvariantReport run_all(const LinearSystem& system, const SolverConfig& config = {}) {
  return diagnose(system, Vector(system.size(), 0.0), config).invariants;
}

}  // namespace cgsolve
