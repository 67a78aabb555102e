#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "cgsolve/error.hpp"
#include "cgsolve/linalg.hpp"

namespace cgsolve {

inline constexpr double kSingularPivotRatio = 1e-14;

/// Gaussian elimination with partial pivoting on a dense copy of the system.
///
/// Reference solution for tests and diagnostics; the CG loop never calls it.
/// A pivot is rejected as singular when it is smaller than 1e-14 times the
/// largest magnitude of its (original) row.
inline Vector direct_solve(const LinearSystem& system) {
  const std::size_t n = system.size();
  DenseMatrix a = to_dense(system.matrix);
  Vector b = system.rhs;

  Vector row_scale(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : a.row(i)) row_scale[i] = std::max(row_scale[i], std::abs(v));
  }

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
    }
    if (!(std::abs(a(pivot, k)) >= kSingularPivotRatio * row_scale[pivot]) || a(pivot, k) == 0.0) {
      throw SingularMatrix("direct_solve: numerically singular pivot in column " + std::to_string(k));
    }
    if (pivot != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
      std::swap(b[k], b[pivot]);
      std::swap(row_scale[k], row_scale[pivot]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double factor = a(i, k) / a(k, k);
      if (factor == 0.0) continue;
      a(i, k) = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
      b[i] -= factor * b[k];
    }
  }

  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double sum = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) sum -= a(ii, j) * x[j];
    x[ii] = sum / a(ii, ii);
  }
  return x;
}

}  // namespace cgsolve
