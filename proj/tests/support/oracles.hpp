#pragma once

// Test-only reference computations. Nothing here calls into the solver path
// it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cgsolve/linalg.hpp"

namespace cgsolve::testing {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
inline std::vector<double> jacobi_eigenvalues(DenseMatrix a, int max_sweeps = 100) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

/// Exact rational arithmetic for small hand-checkable CG traces.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction() = default;
  Fraction(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend Fraction operator+(Fraction a, Fraction b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Fraction operator-(Fraction a, Fraction b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend Fraction operator*(Fraction a, Fraction b) { return {a.num * b.num, a.den * b.den}; }
  friend Fraction operator/(Fraction a, Fraction b) { return {a.num * b.den, a.den * b.num}; }
  friend bool operator==(Fraction a, Fraction b) { return a.num == b.num && a.den == b.den; }
};

using FracVec = std::vector<Fraction>;
using FracMat = std::vector<FracVec>;

struct ExactStep {
  FracVec x, r, d;
  Fraction alpha, beta;
};

/// Textbook CG in exact rationals, written independently of the library:
/// returns one entry per completed iteration (x_{i+1}, r_{i+1}, d_{i+1},
/// alpha_i, beta_{i+1}).
inline std::vector<ExactStep> exact_cg(const FracMat& a, const FracVec& b, std::size_t steps) {
  const std::size_t n = b.size();
  const auto mul = [&](const FracVec& v) {
    FracVec out(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] = out[i] + a[i][j] * v[j];
    return out;
  };
  const auto inner = [&](const FracVec& u, const FracVec& v) {
    Fraction s;
    for (std::size_t i = 0; i < n; ++i) s = s + u[i] * v[i];
    return s;
  };
  FracVec x(n), r = b, d = b;
  std::vector<ExactStep> out;
  for (std::size_t k = 0; k < steps; ++k) {
    const FracVec ad = mul(d);
    const Fraction rr = inner(r, r);
    const Fraction alpha = rr / inner(d, ad);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = x[i] + alpha * d[i];
      r[i] = r[i] - alpha * ad[i];
    }
    const Fraction beta = inner(r, r) / rr;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
    out.push_back({x, r, d, alpha, beta});
    if (inner(r, r) == Fraction(0)) break;
  }
  return out;
}

inline double max_abs_diff(std::span<const double> u, std::span<const double> v) {
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) m = std::max(m, std::abs(u[i] - v[i]));
  return m;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("cgsolve-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

  std::string write(const std::string& name, const std::string& contents) const {
    const auto p = file(name);
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }

private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace cgsolve::testing
