#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cgsolve/error.hpp"
#include "cgsolve/linalg.hpp"

namespace cgsolve {

/// SplitMix64. The whole generator is the three constants below, which makes
/// every seeded problem reproducible from any language:
///
///   state += 0x9E3779B97F4A7C15
///   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() maps the top 53 bits to [0, 1).
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

private:
  std::uint64_t state_;
};

/// Tridiagonal [-1 2 -1] stencil.
inline CsrMatrix generate_laplacian_1d(std::size_t n) {
  if (n < 2) throw InvalidArgument("laplacian1d: n must be at least 2");
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  cols.reserve(3 * n);
  vals.reserve(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      cols.push_back(i - 1);
      vals.push_back(-1.0);
    }
    cols.push_back(i);
    vals.push_back(2.0);
    if (i + 1 < n) {
      cols.push_back(i + 1);
      vals.push_back(-1.0);
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals));
}

/// Q diag(lambda) Q^T with lambda log-uniformly spaced over [1, cond_target]
/// and Q from twice-applied modified Gram-Schmidt on a seeded random matrix.
/// Only the upper triangle is computed; the lower one is mirrored, so the
/// result is exactly symmetric.
inline DenseMatrix generate_random_spd(std::size_t n, std::uint64_t seed, double cond_target) {
  if (n < 1) throw InvalidArgument("random-spd: n must be at least 1");
  if (!(cond_target >= 1.0) || !std::isfinite(cond_target)) {
    throw InvalidArgument("random-spd: cond_target must be a finite value >= 1");
  }

  SplitMix64 rng(seed);
  // q[k] holds column k of Q.
  std::vector<Vector> q(n, Vector(n));
  for (auto& column : q) {
    for (auto& entry : column) entry = rng.uniform(-1.0, 1.0);
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < k; ++j) q[k] = axpy(-dot(q[j], q[k]), q[j], q[k]);
    }
    const double len = norm2(q[k]);
    if (len == 0.0) throw InvalidArgument("random-spd: degenerate random basis");
    for (auto& entry : q[k]) entry /= len;
  }

  Vector lambda(n, 1.0);
  for (std::size_t k = 1; k < n; ++k) {
    lambda[k] = std::pow(cond_target, static_cast<double>(k) / static_cast<double>(n - 1));
  }

  DenseMatrix a(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += q[k][i] * lambda[k] * q[k][j];
      a(i, j) = sum;
      a(j, i) = sum;
    }
  }
  return a;
}

/// Uniform entries in [-1, 1), used for manufactured solutions.
inline Vector generate_random_vector(std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Vector v(n);
  for (auto& entry : v) entry = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace cgsolve
