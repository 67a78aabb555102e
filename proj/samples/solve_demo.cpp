// Solves the 1D Poisson problem -u'' = 1 on a uniform grid and prints the
// residual history next to the steepest-descent baseline.

#include <cstdio>

#include "cgsolve/cgsolve.hpp"

int main() {
  constexpr std::size_t n = 32;
  const cgsolve::LinearSystem system(cgsolve::generate_laplacian_1d(n), cgsolve::Vector(n, 1.0));

  cgsolve::SolverConfig config;
  config.tol_rel = 1e-8;
  const auto cg = cgsolve::solve(system, config);

  config.max_iter = 100000;
  const auto sd = cgsolve::steepest_descent_solve(system, config);

  std::printf("cg: %s after %zu iterations\n", std::string(cgsolve::to_string(cg.stop_reason)).c_str(),
              cg.iterations);
  for (std::size_t i = 0; i < cg.residual_norms.size(); ++i) {
    std::printf("  ||r_%zu|| = %.3e\n", i, cg.residual_norms[i]);
  }
  std::printf("steepest descent: %s after %zu iterations\n",
              std::string(cgsolve::to_string(sd.stop_reason)).c_str(), sd.iterations);
  return 0;
}
