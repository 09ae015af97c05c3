#pragma once

// Positive-definite matrix calculus on dense real symmetric matrices.
//
// Every matrix function goes through a full symmetric eigendecomposition;
// dimensions here are small (a few dozen at most) so there is no need for
// Pade or scaling-and-squaring style algorithms.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncag/errors.hpp"

namespace ncag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultPdTol = 1e-12;
inline constexpr double kDefaultOrderTol = 1e-10;
inline constexpr double kDefaultQoTol = 1e-8;

/// Threshold slack used across the toolkit. All three are relative to the
/// spectral norm of the operands involved.
struct Tolerances {
  double pd = kDefaultPdTol;
  double order = kDefaultOrderTol;
  double qo = kDefaultQoTol;
};

/// Ascending eigenvalues with matching orthonormal eigenvector columns.
struct EigenDecomp {
  Vector eigenvalues;
  Matrix eigenvectors;
};

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

namespace detail {

// First nonzero component of every eigenvector is made positive so that
// decompositions are reproducible.
inline void normalize_signs(Matrix& q) {
  for (Index j = 0; j < q.cols(); ++j) {
    for (Index i = 0; i < q.rows(); ++i) {
      if (std::abs(q(i, j)) > 1e-14) {
        if (q(i, j) < 0.0) q.col(j) *= -1.0;
        break;
      }
    }
  }
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace detail

/// Eigendecomposition of a symmetric matrix (only the lower triangle is read).
inline EigenDecomp sym_eig(const Matrix& sym) {
  if (sym.rows() != sym.cols()) {
    throw DimMismatch("sym_eig: matrix is not square");
  }
  if (!detail::all_finite(sym)) {
    throw ConvergenceFailure("sym_eig: non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("sym_eig: eigensolver did not converge");
  }
  EigenDecomp out{solver.eigenvalues(), solver.eigenvectors()};
  detail::normalize_signs(out.eigenvectors);
  return out;
}

inline Vector sym_eigenvalues(const Matrix& sym) {
  if (!detail::all_finite(sym)) {
    throw ConvergenceFailure("sym_eigenvalues: non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw ConvergenceFailure("sym_eigenvalues: eigensolver did not converge");
  }
  return solver.eigenvalues();
}

inline double lambda_min(const Matrix& sym) { return sym_eigenvalues(sym)(0); }
inline double lambda_max(const Matrix& sym) {
  const Vector ev = sym_eigenvalues(sym);
  return ev(ev.size() - 1);
}

/// Largest singular value.
inline double op_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Q f(Lambda) Q^T.
template <class F>
Matrix spectral_apply(const EigenDecomp& e, F&& f) {
  Vector fl(e.eigenvalues.size());
  for (Index i = 0; i < fl.size(); ++i) fl(i) = f(e.eigenvalues(i));
  return symmetrize(e.eigenvectors * fl.asDiagonal() * e.eigenvectors.transpose());
}

/// Real symmetric positive-definite matrix with its spectral data cached.
///
/// The input is symmetrized as (M + M^T)/2. Construction fails with
/// NonPositiveSpectrum unless lambda_min > pd_tol * lambda_max.
class PDMatrix {
 public:
  explicit PDMatrix(const Matrix& m, double pd_tol = kDefaultPdTol)
      : m_(symmetrize(m)) {
    if (m.rows() != m.cols() || m.rows() == 0) {
      throw DimMismatch("PDMatrix: matrix must be square and non-empty");
    }
    if (!detail::all_finite(m_)) {
      throw NonPositiveSpectrum("PDMatrix: non-finite entries");
    }
    eig_ = std::make_shared<const EigenDecomp>(sym_eig(m_));
    check_spectrum(pd_tol);
  }

  static PDMatrix identity(Index n) { return PDMatrix(Matrix::Identity(n, n)); }

  static PDMatrix diagonal(const Vector& d) { return PDMatrix(Matrix(d.asDiagonal())); }
  static PDMatrix diagonal(std::initializer_list<double> d) {
    Vector v(static_cast<Index>(d.size()));
    Index i = 0;
    for (double x : d) v(i++) = x;
    return diagonal(v);
  }

  static PDMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const auto n = static_cast<Index>(rows.size());
    Matrix m(n, n);
    Index i = 0;
    for (const auto& row : rows) {
      if (static_cast<Index>(row.size()) != n) {
        throw DimMismatch("PDMatrix::from_rows: ragged rows");
      }
      Index j = 0;
      for (double x : row) m(i, j++) = x;
      ++i;
    }
    return PDMatrix(m);
  }

  /// Builds Q diag(values) Q^T and caches the supplied spectral data, avoiding
  /// a second decomposition. Values need not be sorted.
  static PDMatrix from_spectrum(const Matrix& q, const Vector& values,
                                double pd_tol = kDefaultPdTol) {
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values(a) < values(b); });
    EigenDecomp e{Vector(values.size()), Matrix(q.rows(), q.cols())};
    for (std::size_t k = 0; k < order.size(); ++k) {
      e.eigenvalues(static_cast<Index>(k)) = values(order[k]);
      e.eigenvectors.col(static_cast<Index>(k)) = q.col(order[k]);
    }
    detail::normalize_signs(e.eigenvectors);
    Matrix m = symmetrize(e.eigenvectors * e.eigenvalues.asDiagonal() *
                          e.eigenvectors.transpose());
    PDMatrix out(std::move(m), std::make_shared<const EigenDecomp>(std::move(e)));
    out.check_spectrum(pd_tol);
    return out;
  }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  const EigenDecomp& eig() const { return *eig_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double min_eigenvalue() const { return eig_->eigenvalues(0); }
  double max_eigenvalue() const { return eig_->eigenvalues(dim() - 1); }
  /// Spectral norm.
  double norm() const { return max_eigenvalue(); }
  double condition() const { return max_eigenvalue() / min_eigenvalue(); }

  /// Q f(Lambda) Q^T without the positive-definiteness check; used for
  /// intermediates that may be far more ill-conditioned than any input.
  template <class F>
  Matrix apply(F&& f) const {
    return spectral_apply(*eig_, std::forward<F>(f));
  }
  Matrix power(double s) const {
    if (s == 0.0) return Matrix::Identity(dim(), dim());
    if (s == 1.0) return m_;
    return apply([s](double x) { return std::pow(x, s); });
  }

 private:
  PDMatrix(Matrix m, std::shared_ptr<const EigenDecomp> e)
      : m_(std::move(m)), eig_(std::move(e)) {}

  void check_spectrum(double pd_tol) const {
    const double lo = min_eigenvalue();
    const double hi = max_eigenvalue();
    if (!(lo > 0.0) || !(lo > pd_tol * hi)) {
      throw NonPositiveSpectrum("PDMatrix: spectrum [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "] is not positive definite");
    }
  }

  Matrix m_;
  std::shared_ptr<const EigenDecomp> eig_;
};

/// Relative Frobenius distance ||a - b|| / ||b||.
inline double rel_frobenius(const Matrix& a, const Matrix& b) {
  const double denom = b.norm();
  return denom > 0.0 ? (a - b).norm() / denom : (a - b).norm();
}

inline EigenDecomp sym_eig(const PDMatrix& a) { return a.eig(); }

/// Scalar function tag for the functional calculus.
struct SpectralFn {
  enum class Kind { power, inverse, sqrt };
  Kind kind = Kind::power;
  double exponent = 1.0;

  static SpectralFn power(double s) { return {Kind::power, s}; }
  static SpectralFn inverse() { return {Kind::inverse, -1.0}; }
  static SpectralFn sqrt() { return {Kind::sqrt, 0.5}; }

  double operator()(double x) const {
    switch (kind) {
      case Kind::inverse:
        return 1.0 / x;
      case Kind::sqrt:
        return std::sqrt(x);
      case Kind::power:
        break;
    }
    return exponent == 0.0 ? 1.0 : std::pow(x, exponent);
  }
};

inline PDMatrix spectral_fn(const PDMatrix& a, SpectralFn f,
                            double pd_tol = kDefaultPdTol) {
  const EigenDecomp& e = a.eig();
  Vector values(e.eigenvalues.size());
  for (Index i = 0; i < values.size(); ++i) values(i) = f(e.eigenvalues(i));
  return PDMatrix::from_spectrum(e.eigenvectors, values, pd_tol);
}

inline PDMatrix congruence(const PDMatrix& c, const PDMatrix& a) {
  require_same_dim(c.dim(), a.dim(), "congruence");
  return PDMatrix(c.matrix() * a.matrix() * c.matrix());
}

/// lambda_min(A - B); positive means A strictly dominates B.
inline double loewner_gap(const Matrix& a, const Matrix& b) {
  require_same_dim(a.rows(), b.rows(), "loewner_gap");
  return lambda_min(symmetrize(a - b));
}
inline double loewner_gap(const PDMatrix& a, const PDMatrix& b) {
  return loewner_gap(a.matrix(), b.matrix());
}

/// A >= B in the Loewner order, up to order_tol relative to max(||A||, ||B||).
inline bool loewner_geq(const PDMatrix& a, const PDMatrix& b,
                        double order_tol = kDefaultOrderTol) {
  return loewner_gap(a, b) >= -order_tol * std::max(a.norm(), b.norm());
}

/// A unit vector; normalized on construction.
class UnitVector {
 public:
  explicit UnitVector(const Vector& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw DimMismatch("UnitVector: zero or non-finite vector");
    }
    v_ = v / n;
  }
  static UnitVector basis(Index dim, Index i) { return UnitVector(Vector::Unit(dim, i)); }

  Index dim() const { return v_.size(); }
  const Vector& vector() const { return v_; }

 private:
  Vector v_;
};

/// <M xi, xi>.
inline double rayleigh(const Matrix& m, const Vector& xi) { return xi.dot(m * xi); }

/// Orthogonal projection stored as orthonormal columns spanning its range.
class Projection {
 public:
  explicit Projection(Matrix basis) : basis_(std::move(basis)) {}

  Index dim() const { return basis_.rows(); }
  Index rank() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

  Matrix materialize() const { return basis_ * basis_.transpose(); }

  /// Orthonormal basis of the orthogonal complement of the range.
  Matrix complement_basis() const {
    const Index n = dim();
    const Index k = rank();
    if (k == 0) return Matrix::Identity(n, n);
    Eigen::HouseholderQR<Matrix> qr(basis_);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    return q.rightCols(n - k);
  }

  /// P X P restricted to range(P), expressed in the stored basis.
  Matrix compress(const Matrix& x) const { return basis_.transpose() * x * basis_; }

 private:
  Matrix basis_;
};

}  // namespace ncag
