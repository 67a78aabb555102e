#pragma once

// Dense/CSR storage and the handful of kernels the solver needs. Every
// reduction runs sequentially in index order so results are reproducible
// bit for bit.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cgsolve/error.hpp"

namespace cgsolve {

using Vector = std::vector<double>;

inline constexpr double kSymmetryTolerance = 1e-12;

namespace detail {

inline void require_same_length(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

inline bool symmetric_pair(double upper, double lower) {
  return std::abs(upper - lower) <= kSymmetryTolerance * std::max(1.0, std::abs(upper));
}

}  // namespace detail

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

/// Square matrix stored row-major.
class DenseMatrix {
public:
  DenseMatrix() = default;

  explicit DenseMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

  DenseMatrix(std::size_t n, std::vector<double> row_major) : n_(n), values_(std::move(row_major)) {
    if (values_.size() != n_ * n_) {
      throw DimensionError("DenseMatrix: expected " + std::to_string(n_ * n_) + " entries, got " +
                           std::to_string(values_.size()));
    }
  }

  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
    values_.reserve(n_ * n_);
    for (const auto& row : rows) {
      if (row.size() != n_) throw DimensionError("DenseMatrix: rows must have length n");
      values_.insert(values_.end(), row.begin(), row.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_, n_};
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

/// Square matrix in compressed sparse row form.
///
/// The constructor validates the structural invariants (offsets monotone,
/// columns in range and strictly increasing per row). Numerical symmetry is
/// measured with check_symmetry() rather than enforced, so that deliberately
/// perturbed operators can still be fed to the diagnostics.
class CsrMatrix {
public:
  CsrMatrix() : row_offsets_{0} {}

  CsrMatrix(std::size_t n, std::vector<std::size_t> row_offsets,
            std::vector<std::size_t> col_indices, std::vector<double> values)
      : n_(n),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    if (row_offsets_.size() != n_ + 1) throw InvalidArgument("CsrMatrix: row_offsets must have n+1 entries");
    if (row_offsets_.front() != 0) throw InvalidArgument("CsrMatrix: row_offsets[0] must be 0");
    if (col_indices_.size() != values_.size()) {
      throw InvalidArgument("CsrMatrix: col_indices and values differ in length");
    }
    if (row_offsets_.back() != values_.size()) {
      throw InvalidArgument("CsrMatrix: row_offsets[n] must equal the nonzero count");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (row_offsets_[i] > row_offsets_[i + 1]) throw InvalidArgument("CsrMatrix: row_offsets decreasing");
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        if (col_indices_[k] >= n_) throw InvalidArgument("CsrMatrix: column index out of range");
        if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
          throw InvalidArgument("CsrMatrix: column indices must strictly increase within a row");
        }
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::size_t nonzeros() const noexcept { return values_.size(); }

  [[nodiscard]] std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  [[nodiscard]] std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  // Stored value at (i, j), zero when the entry is not in the pattern.
  [[nodiscard]] double at(std::size_t i, std::size_t j) const {
    const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
    const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

using Operator = std::variant<DenseMatrix, CsrMatrix>;

inline std::size_t dimension(const Operator& a) {
  return std::visit([](const auto& m) { return m.size(); }, a);
}

/// The system A x = b.
struct LinearSystem {
  LinearSystem(Operator op, Vector b) : matrix(std::move(op)), rhs(std::move(b)) {
    if (rhs.empty()) throw InvalidArgument("LinearSystem: dimension must be at least 1");
    detail::require_same_length(dimension(matrix), rhs.size(), "LinearSystem");
    if (!all_finite(rhs)) throw NonFiniteError("LinearSystem: right-hand side has non-finite entries");
    const bool finite_operator = std::visit([](const auto& m) { return all_finite(m.values()); }, matrix);
    if (!finite_operator) throw NonFiniteError("LinearSystem: operator has non-finite entries");
  }

  [[nodiscard]] std::size_t size() const noexcept { return rhs.size(); }

  Operator matrix;
  Vector rhs;
};

inline double dot(std::span<const double> u, std::span<const double> v) {
  detail::require_same_length(u.size(), v.size(), "dot");
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += u[k] * v[k];
  return sum;
}

inline double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline Vector matvec(const DenseMatrix& a, std::span<const double> v) {
  detail::require_same_length(a.size(), v.size(), "matvec");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = dot(a.row(i), v);
  return out;
}

inline Vector matvec(const CsrMatrix& a, std::span<const double> v) {
  detail::require_same_length(a.size(), v.size(), "matvec");
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * v[cols[k]];
    out[i] = sum;
  }
  return out;
}

inline Vector matvec(const Operator& a, std::span<const double> v) {
  return std::visit([&](const auto& m) { return matvec(m, v); }, a);
}

/// a*x + y
inline Vector axpy(double a, std::span<const double> x, std::span<const double> y) {
  detail::require_same_length(x.size(), y.size(), "axpy");
  Vector out(y.begin(), y.end());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] += a * x[k];
  return out;
}

/// u - v
inline Vector subtract(std::span<const double> u, std::span<const double> v) {
  return axpy(-1.0, v, u);
}

inline bool check_symmetry(const DenseMatrix& a) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (!detail::symmetric_pair(a(i, j), a(j, i)) || !detail::symmetric_pair(a(j, i), a(i, j))) {
        return false;
      }
    }
  }
  return true;
}

inline bool check_symmetry(const CsrMatrix& a) {
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) {
      const double mirror = a.at(cols[k], i);
      if (!detail::symmetric_pair(vals[k], mirror)) return false;
    }
  }
  return true;
}

inline bool check_symmetry(const Operator& a) {
  return std::visit([](const auto& m) { return check_symmetry(m); }, a);
}

inline double frobenius_norm(const Operator& a) {
  return std::visit([](const auto& m) { return norm2(m.values()); }, a);
}

inline DenseMatrix to_dense(const CsrMatrix& a) {
  DenseMatrix out(a.size());
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = offsets[i]; k < offsets[i + 1]; ++k) out(i, cols[k]) = vals[k];
  }
  return out;
}

inline DenseMatrix to_dense(const Operator& a) {
  if (const auto* dense = std::get_if<DenseMatrix>(&a)) return *dense;
  return to_dense(std::get<CsrMatrix>(a));
}

// Exact zeros are dropped from the pattern.
inline CsrMatrix to_csr(const DenseMatrix& a) {
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> cols;
  std::vector<double> vals;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (a(i, j) != 0.0) {
        cols.push_back(j);
        vals.push_back(a(i, j));
      }
    }
    offsets.push_back(vals.size());
  }
  return CsrMatrix(a.size(), std::move(offsets), std::move(cols), std::move(vals));
}

}  // namespace cgsolve
