#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include <Eigen/Dense>

#include "sofic/errors.hpp"
#include "sofic/permutation.hpp"
#include "sofic/rational.hpp"

namespace sofic {

/// Tolerance for equality-like assertions on floating-point unitaries.
inline constexpr double kUnitaryTolerance = 1e-9;

/// Number of points where a and b disagree.
inline std::size_t mismatch_count(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw ApproximationError("hamming distance of permutations on different sets");
  std::size_t count = 0;
  for (std::size_t f = 0; f < a.size(); ++f) count += a(f) != b(f) ? 1 : 0;
  return count;
}

/// Number of points f with product(f) != left(right(f)), without forming the
/// composition.
inline std::size_t composition_mismatch_count(const Permutation& product, const Permutation& left,
                                              const Permutation& right) {
  if (product.size() != left.size() || left.size() != right.size()) {
    throw ApproximationError("defect of permutations on different sets");
  }
  std::size_t count = 0;
  for (std::size_t f = 0; f < product.size(); ++f) count += product(f) != left(right(f)) ? 1 : 0;
  return count;
}

/// Normalized Hamming distance |{f : a(f) != b(f)}| / |F|, exact.
inline Rational hamming(const Permutation& a, const Permutation& b) {
  std::size_t n = a.size();
  std::size_t moved = mismatch_count(a, b);
  if (n == 0) return Rational(0);
  return Rational(Integer(moved), Integer(n));
}

/// A complex matrix known to be unitary within kUnitaryTolerance.
class UnitaryMatrix {
 public:
  using Matrix = Eigen::MatrixXcd;

  explicit UnitaryMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw ApproximationError("unitary matrix must be square");
    double err = unitarity_error(m_);
    if (err > kUnitaryTolerance) {
      throw ApproximationError("matrix is not unitary (||U*U - I||_F = " + std::to_string(err) + ")");
    }
  }

  /// Skips the unitarity check; for matrices unitary by construction
  /// (permutation matrices, products and Kronecker products of unitaries).
  static UnitaryMatrix assume_unitary(Matrix m) { return UnitaryMatrix(std::move(m), Trusted{}); }

  static UnitaryMatrix identity(std::size_t n) {
    return assume_unitary(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  }

  static double unitarity_error(const Matrix& m) {
    return (m.adjoint() * m - Matrix::Identity(m.rows(), m.cols())).norm();
  }

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Matrix& matrix() const noexcept { return m_; }
  std::complex<double> operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    if (a.dimension() != b.dimension()) throw ApproximationError("multiplying unitaries of different dimension");
    return assume_unitary(a.m_ * b.m_);
  }

 private:
  struct Trusted {};
  UnitaryMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// 0/1 matrix with a one at (a(f), f).
inline UnitaryMatrix perm_to_unitary(const Permutation& a) {
  const auto n = static_cast<Eigen::Index>(a.size());
  UnitaryMatrix::Matrix m = UnitaryMatrix::Matrix::Zero(n, n);
  for (Eigen::Index f = 0; f < n; ++f) m(a(static_cast<std::size_t>(f)), f) = 1.0;
  return UnitaryMatrix::assume_unitary(std::move(m));
}

/// Normalized Hilbert-Schmidt distance sqrt((1/n) sum |u_ij - v_ij|^2).
/// Entries are summed row-major in a fixed order.
inline double hs_distance(const UnitaryMatrix& u, const UnitaryMatrix& v) {
  if (u.dimension() != v.dimension()) throw ApproximationError("HS distance of unitaries of different dimension");
  const std::size_t n = u.dimension();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) sum += std::norm(u(i, j) - v(i, j));
  }
  return std::sqrt(sum / static_cast<double>(n));
}

/// |d_F(a,b) - d_HS(P_a, P_b)^2 / 2|.
inline double bridge_residual(const Permutation& a, const Permutation& b) {
  double d = hs_distance(perm_to_unitary(a), perm_to_unitary(b));
  return std::abs(to_double(hamming(a, b)) - 0.5 * d * d);
}

}  // namespace sofic
