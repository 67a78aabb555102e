// cgsolve: command-line front end.
//
// Exit codes: 0 converged (or all checks passed), 1 I/O or parse error,
// 2 usage error, 3 iteration cap reached, 4 breakdown, 5 invariant check failed.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cgsolve/cgsolve.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kUsage = 2,
  kMaxIterations = 3,
  kBreakdown = 4,
  kCheckFailed = 5,
};

struct SolveArgs {
  std::string matrix;
  std::string rhs;
  std::string x0;
  double tol = 1e-10;
  std::optional<std::size_t> max_iter;
  std::size_t true_residual_interval = 0;
  std::string report;
  std::string x_out;
};

struct GenerateArgs {
  std::string family;
  std::size_t n = 0;
  std::uint64_t seed = 42;
  double cond = 100.0;
  std::string out;
  std::string rhs_out;
  std::string xtrue_out;
};

struct BenchArgs {
  std::string family;
  std::vector<std::size_t> sizes;
  double tol = 1e-10;
  std::uint64_t seed = 42;
  double cond = 100.0;
  std::optional<std::size_t> max_iter;
  std::string csv;
  bool no_timing = false;
};

// Thrown for bad parameter values that CLI11 cannot see (n < 2, ...).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void add_solve_flags(CLI::App& cmd, SolveArgs& a) {
  cmd.add_option("--matrix", a.matrix, "Matrix Market file holding A")->required();
  cmd.add_option("--rhs", a.rhs, "vector file holding b")->required();
  cmd.add_option("--x0", a.x0, "vector file with the initial guess (default: zero)");
  cmd.add_option("--tol", a.tol, "relative residual tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  cmd.add_option("--max-iter", a.max_iter, "iteration cap (default: 2n)")->check(CLI::PositiveNumber);
  cmd.add_option("--true-residual-interval", a.true_residual_interval,
                 "replace the recurred residual by b - Ax every K iterations (0 = never)")
      ->capture_default_str();
  cmd.add_option("--report", a.report, "write the JSON report here");
  cmd.add_option("--x-out", a.x_out, "write the solution vector here");
}

cgsolve::LinearSystem load_system(const SolveArgs& a) {
  auto matrix = cgsolve::read_matrix_market(a.matrix);
  auto rhs = cgsolve::read_vector(a.rhs);
  return {std::move(matrix), std::move(rhs)};
}

cgsolve::Vector load_x0(const SolveArgs& a, std::size_t n) {
  if (a.x0.empty()) return cgsolve::Vector(n, 0.0);
  auto x0 = cgsolve::read_vector(a.x0);
  if (x0.size() != n) {
    throw cgsolve::DimensionError("x0 has length " + std::to_string(x0.size()) + ", system has " +
                                  std::to_string(n));
  }
  return x0;
}

cgsolve::SolverConfig config_from(const SolveArgs& a) {
  cgsolve::SolverConfig config;
  config.tol_rel = a.tol;
  config.max_iter = a.max_iter;
  config.true_residual_check_interval = a.true_residual_interval;
  return config;
}

double relative_residual(const cgsolve::SolveReport& report, const cgsolve::LinearSystem& system) {
  const double b_norm = cgsolve::norm2(system.rhs);
  return b_norm == 0.0 ? 0.0 : report.residual_norms.back() / b_norm;
}

std::string summary_line(const cgsolve::SolveReport& report, const cgsolve::LinearSystem& system) {
  const std::string relres = ", ||r||/||b|| = " + sci(relative_residual(report, system));
  const std::string k = std::to_string(report.iterations);
  switch (report.stop_reason) {
    case cgsolve::StopReason::Converged: return "converged in " + k + " iterations" + relres;
    case cgsolve::StopReason::MaxIterations: return "iteration cap reached after " + k + " iterations" + relres;
    case cgsolve::StopReason::Breakdown: return "breakdown at iteration " + k + relres;
    case cgsolve::StopReason::ZeroRhs: return "zero right-hand side, x = 0";
  }
  return {};
}

int exit_code_for(cgsolve::StopReason reason) {
  switch (reason) {
    case cgsolve::StopReason::Converged:
    case cgsolve::StopReason::ZeroRhs: return kOk;
    case cgsolve::StopReason::MaxIterations: return kMaxIterations;
    case cgsolve::StopReason::Breakdown: return kBreakdown;
  }
  return kIoError;
}

int cmd_solve(const SolveArgs& a) {
  const auto system = load_system(a);
  const auto x0 = load_x0(a, system.size());
  const auto report = cgsolve::solve(system, x0, config_from(a));
  std::cout << summary_line(report, system) << '\n';
  if (!a.report.empty()) cgsolve::write_report(report, nullptr, a.report);
  if (!a.x_out.empty()) cgsolve::write_vector(report.x, a.x_out);
  return exit_code_for(report.stop_reason);
}

void print_table(const cgsolve::InvariantReport& inv, std::ostream& out) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-30s %-8s %-11s %-11s %s\n", "check", "status", "violation", "threshold",
                "worst_iter");
  out << buf;
  for (const auto& e : inv.entries) {
    const std::string worst = e.worst_iteration ? std::to_string(*e.worst_iteration) : "-";
    std::snprintf(buf, sizeof buf, "%-30s %-8s %-11s %-11s %s\n", e.name.c_str(),
                  std::string(cgsolve::to_string(e.status)).c_str(), sci(e.violation).c_str(),
                  sci(e.threshold).c_str(), worst.c_str());
    out << buf;
    for (const auto& leg : e.legs) {
      std::snprintf(buf, sizeof buf, "  %-28s %-8s %-11s %-11s\n", leg.name.c_str(), leg.pass ? "pass" : "fail",
                    sci(leg.violation).c_str(), sci(leg.threshold).c_str());
      out << buf;
    }
  }
}

int cmd_diagnose(const SolveArgs& a) {
  const auto system = load_system(a);
  const auto x0 = load_x0(a, system.size());
  const auto diagnosis = cgsolve::diagnose(system, x0, config_from(a));
  std::cout << summary_line(diagnosis.solve, system) << '\n';
  print_table(diagnosis.invariants, std::cout);
  if (!a.report.empty()) cgsolve::write_report(diagnosis.solve, &diagnosis.invariants, a.report);
  if (!a.x_out.empty()) cgsolve::write_vector(diagnosis.solve.x, a.x_out);
  return diagnosis.invariants.all_passed() ? kOk : kCheckFailed;
}

cgsolve::Operator make_family(const std::string& family, std::size_t n, std::uint64_t seed, double cond) {
  try {
    if (family == "laplacian1d") return cgsolve::generate_laplacian_1d(n);
    if (family == "random-spd") return cgsolve::generate_random_spd(n, seed, cond);
    if (family == "identity") {
      if (n < 1) throw cgsolve::InvalidArgument("identity: n must be at least 1");
      return cgsolve::to_csr(cgsolve::DenseMatrix::identity(n));
    }
  } catch (const cgsolve::InvalidArgument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown family '" + family + "'");
}

// Manufactured solution shared by generate and bench.
cgsolve::Vector manufactured_solution(std::size_t n, std::uint64_t seed) {
  return cgsolve::generate_random_vector(n, seed + 1);
}

int cmd_generate(const GenerateArgs& a) {
  const auto matrix = make_family(a.family, a.n, a.seed, a.cond);
  cgsolve::write_matrix_market(matrix, a.out);
  if (!a.rhs_out.empty() || !a.xtrue_out.empty()) {
    const auto x_true = manufactured_solution(a.n, a.seed);
    if (!a.rhs_out.empty()) cgsolve::write_vector(cgsolve::matvec(matrix, x_true), a.rhs_out);
    if (!a.xtrue_out.empty()) cgsolve::write_vector(x_true, a.xtrue_out);
  }
  return kOk;
}

int cmd_bench(const BenchArgs& a) {
  std::ofstream file;
  if (!a.csv.empty()) {
    file.open(a.csv, std::ios::binary | std::ios::trunc);
    if (!file) throw cgsolve::IoError("cannot open '" + a.csv + "' for writing");
  }
  std::ostream& out = a.csv.empty() ? std::cout : file;
  out << "family,n,method,iterations,final_relres,wall_ms\n";

  int worst = kOk;
  for (const std::size_t n : a.sizes) {
    const auto matrix = make_family(a.family, n, a.seed, a.cond);
    const auto x_true = manufactured_solution(n, a.seed);
    const cgsolve::LinearSystem system(matrix, cgsolve::matvec(matrix, x_true));

    cgsolve::SolverConfig cg_config;
    cg_config.tol_rel = a.tol;
    cg_config.max_iter = a.max_iter;
    cgsolve::SolverConfig sd_config = cg_config;
    // Steepest descent needs O(cond) iterations, far past the CG default of 2n.
    if (!sd_config.max_iter) sd_config.max_iter = 1'000'000;

    const auto run = [&](const char* method, auto&& solver, const cgsolve::SolverConfig& config) {
      const auto start = std::chrono::steady_clock::now();
      const auto report = solver(system, config);
      const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f", a.no_timing ? 0.0 : elapsed.count());
      out << a.family << ',' << n << ',' << method << ',' << report.iterations << ','
          << sci(relative_residual(report, system)) << ',' << buf << '\n';
      worst = std::max(worst, exit_code_for(report.stop_reason));
    };
    run("cg", [](const auto& s, const auto& c) { return cgsolve::solve(s, c); }, cg_config);
    run("sd", [](const auto& s, const auto& c) { return cgsolve::steepest_descent_solve(s, c); }, sd_config);
  }
  out.flush();
  if (!out) throw cgsolve::IoError("write of CSV output failed");
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conjugate gradient solver for symmetric positive-definite systems"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  auto* solve_cmd = app.add_subcommand("solve", "solve A x = b and print a one-line summary");
  add_solve_flags(*solve_cmd, solve_args);

  SolveArgs diagnose_args;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "solve with trace capture and check every CG identity");
  add_solve_flags(*diagnose_cmd, diagnose_args);

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "write a test matrix (and optionally b = A x_true)");
  gen_cmd->add_option("family", gen.family, "laplacian1d | random-spd | identity")
      ->required()
      ->check(CLI::IsMember({"laplacian1d", "random-spd", "identity"}));
  gen_cmd->add_option("--n", gen.n, "dimension")->required();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--cond", gen.cond, "target condition number (random-spd)")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Matrix Market output path")->required();
  gen_cmd->add_option("--rhs-out", gen.rhs_out, "write b = A x_true here");
  gen_cmd->add_option("--xtrue-out", gen.xtrue_out, "write x_true here");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "compare CG against steepest descent, CSV output");
  bench_cmd->add_option("--family", bench.family, "identity | laplacian1d | random-spd")
      ->required()
      ->check(CLI::IsMember({"laplacian1d", "random-spd", "identity"}));
  bench_cmd->add_option("--sizes", bench.sizes, "comma-separated dimensions")->required()->delimiter(',');
  bench_cmd->add_option("--tol", bench.tol, "relative residual tolerance")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench.seed, "generator seed")->capture_default_str();
  bench_cmd->add_option("--cond", bench.cond, "target condition number (random-spd)")->capture_default_str();
  bench_cmd->add_option("--max-iter", bench.max_iter, "iteration cap for both methods")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--csv", bench.csv, "write CSV here instead of standard output");
  bench_cmd->add_flag("--no-timing", bench.no_timing, "report wall_ms as 0 for byte-stable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_args);
    if (*diagnose_cmd) return cmd_diagnose(diagnose_args);
    if (*gen_cmd) return cmd_generate(gen);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const cgsolve::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kUsage;
}
