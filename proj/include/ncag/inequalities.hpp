#pragma once

// Scalar and operator arithmetic-geometric mean gaps, the scalar extremizers
// behind the vector-state certificates, and the certificates themselves.

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "ncag/means.hpp"
#include "ncag/pdcore.hpp"
#include "ncag/random.hpp"

namespace ncag {

/// Normalized slack for the AG bound axiom: gap >= -kAgTol * scale.
inline constexpr double kAgTol = 1e-8;

enum class Direction { geq, leq };

inline std::string_view to_string(Direction d) { return d == Direction::geq ? "geq" : "leq"; }

inline Direction direction_for(double r) {
  if (r == 1.0 || !(r > 0.0)) throw InvalidR("r must be positive and different from 1");
  return r > 1.0 ? Direction::geq : Direction::leq;
}

/// lambda_min of (LHS - RHS) oriented so that a nonnegative gap means the
/// inequality holds. `scale` is max(||LHS||, ||RHS||).
struct GapReport {
  double gap = 0.0;
  double scale = 1.0;
  Direction direction = Direction::geq;
  std::optional<UnitVector> witness_vector;

  double normalized() const { return scale > 0.0 ? gap / scale : gap; }
  bool holds(double tol = kDefaultOrderTol) const { return gap >= -tol * scale; }
};

namespace detail {

inline double sym_norm(const Matrix& m) {
  const Vector ev = sym_eigenvalues(m);
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

inline GapReport make_gap(const Matrix& lhs, const Matrix& rhs, Direction dir, double tol) {
  const Matrix diff = symmetrize(dir == Direction::geq ? Matrix(lhs - rhs) : Matrix(rhs - lhs));
  const EigenDecomp e = sym_eig(diff);
  GapReport out;
  out.gap = e.eigenvalues(0);
  out.scale = std::max(sym_norm(lhs), sym_norm(rhs));
  out.direction = dir;
  if (out.gap < -tol * out.scale) out.witness_vector = UnitVector(e.eigenvectors.col(0));
  return out;
}

}  // namespace detail

/// r > 1: a^r b^{1-r} + (r-1) b - r a. 0 < r < 1: r a + (1-r) b - a^r b^{1-r}.
/// Nonnegative in both branches.
inline double scalar_ag_gap(double a, double b, double r) {
  if (!(a > 0.0) || !(b > 0.0)) throw NonPositiveSpectrum("scalar_ag_gap: a, b must be > 0");
  const double geo = std::pow(a, r) * std::pow(b, 1.0 - r);
  const double arith = r * a + (1.0 - r) * b;
  return direction_for(r) == Direction::geq ? geo - arith : arith - geo;
}

/// Operator Young inequality X^r + (r-1) >= r X for r > 1, reversed for 0 < r < 1.
inline GapReport young_gap(const PDMatrix& x, double r, double order_tol = kDefaultOrderTol) {
  const Direction dir = direction_for(r);
  const Index n = x.dim();
  const Matrix lhs = x.power(r) + (r - 1.0) * Matrix::Identity(n, n);
  const Matrix rhs = r * x.matrix();
  // leq: r X + (1-r) - X^r >= 0, i.e. the same difference with its sign flipped.
  return detail::make_gap(lhs, rhs, dir, order_tol);
}

/// M(A,B) against rA + (1-r)B, direction keyed on the candidate's r.
inline GapReport ag_gap(const MeanCandidate& c, const PDMatrix& a, const PDMatrix& b,
                        double order_tol = kDefaultOrderTol) {
  require_same_dim(a.dim(), b.dim(), "ag_gap");
  const double r = c.r();
  const Matrix mean = eval_candidate(c, a, b).matrix();
  const Matrix arith = r * a.matrix() + (1.0 - r) * b.matrix();
  return detail::make_gap(mean, arith, direction_for(r), order_tol);
}

struct ScalarExtremum {
  double t_star;
  double value;
};

/// f(t) = r t^{1-r} + (1-r) t^{-r} c, the lower bound family used for the
/// vector-state certificate.
inline double certificate_objective(double t, double c, double r) {
  return r * std::pow(t, 1.0 - r) + (1.0 - r) * std::pow(t, -r) * c;
}

/// Maximizer of certificate_objective on (0, inf): t* = c, value c^{1-r}.
inline ScalarExtremum f_max(double c, double r) {
  if (!(c > 0.0)) throw NonPositiveSpectrum("f_max: c must be > 0");
  if (!(r > 1.0)) throw InvalidR("f_max: r must be > 1");
  return {c, std::pow(c, 1.0 - r)};
}

/// Minimizer of t x + y / t on (0, inf): t* = sqrt(y/x), value 2 sqrt(xy).
inline ScalarExtremum f_min(double x, double y) {
  if (!(x > 0.0) || !(y > 0.0)) throw NonPositiveSpectrum("f_min: x, y must be > 0");
  return {std::sqrt(y / x), 2.0 * std::sqrt(x * y)};
}

/// X = A^{-1/2} M(A,B) A^{-1/2} and Y = A^{-1/2} M_r(A,B) A^{-1/2}.
struct CertificateOperands {
  PDMatrix x;
  PDMatrix y;
};

inline CertificateOperands certificate_operands(const MeanCandidate& c, const PDMatrix& a,
                                                const PDMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "certificate_operands");
  const Matrix neg_half = a.apply([](double v) { return 1.0 / std::sqrt(v); });
  const Matrix m = eval_candidate(c, a, b).matrix();
  const Matrix mr = r_mean(a, b, c.r()).matrix();
  return {PDMatrix(neg_half * m * neg_half, 0.0), PDMatrix(neg_half * mr * neg_half, 0.0)};
}

/// Basis vectors, eigenvectors of X and Y, and `random_count` random unit vectors.
inline std::vector<UnitVector> default_certificate_vectors(const CertificateOperands& ops,
                                                           std::size_t random_count, Rng& rng) {
  const Index n = ops.x.dim();
  std::vector<UnitVector> out;
  out.reserve(static_cast<std::size_t>(3 * n) + random_count);
  for (Index i = 0; i < n; ++i) out.push_back(UnitVector::basis(n, i));
  for (Index i = 0; i < n; ++i) out.emplace_back(ops.x.eig().eigenvectors.col(i));
  for (Index i = 0; i < n; ++i) out.emplace_back(ops.y.eig().eigenvectors.col(i));
  for (std::size_t k = 0; k < random_count; ++k) out.push_back(sample_unit_vector(n, rng));
  return out;
}

/// Minimum over `vectors` of <X xi,xi><Y^{-1} xi,xi> (r >= 2) or
/// <X^{1/(r-1)} xi,xi><Y^{-1/(r-1)} xi,xi> (1 < r <= 2).
inline double certificate_min(const CertificateOperands& ops, double r,
                              const std::vector<UnitVector>& vectors) {
  if (!(r > 1.0)) throw InvalidR("certificate: r must be > 1");
  const double p = r >= 2.0 ? 1.0 : 1.0 / (r - 1.0);
  const Matrix xp = ops.x.power(p);
  const Matrix yp = ops.y.power(-p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& v : vectors) {
    require_same_dim(v.dim(), ops.x.dim(), "certificate");
    best = std::min(best, rayleigh(xp, v.vector()) * rayleigh(yp, v.vector()));
  }
  return best;
}

inline double state_certificate(const MeanCandidate& c, const PDMatrix& a, const PDMatrix& b,
                                  const std::vector<UnitVector>& vectors) {
  if (!(c.r() > 1.0)) throw InvalidR("state_certificate: r must be > 1");
  return certificate_min(certificate_operands(c, a, b), c.r(), vectors);
}

/// Certificate over the default vector set with `random_count` random vectors.
inline double state_certificate(const MeanCandidate& c, const PDMatrix& a, const PDMatrix& b,
                                  std::size_t random_count, Rng& rng) {
  if (!(c.r() > 1.0)) throw InvalidR("state_certificate: r must be > 1");
  const CertificateOperands ops = certificate_operands(c, a, b);
  return certificate_min(ops, c.r(), default_certificate_vectors(ops, random_count, rng));
}

/// Sampled AG bound: violation = max(0, -gap / scale).
inline AxiomReport check_ag_bound(const MeanCandidate& c, const AxiomCampaign& plan) {
  return detail::run_axiom_campaign(
      Axiom::ag_bound, plan,
      [&](std::size_t i, Index dim, Rng& rng) {
        const PDMatrix a = sample_pd(plan.ensemble, dim, plan.condition_cap, rng);
        const PDMatrix b = sample_pd(plan.ensemble, dim, plan.condition_cap, rng);
        AxiomWitness w{a.matrix(), b.matrix(), 1.0, i, 0.0};
        const GapReport g = detail::with_sample(w, [&] { return ag_gap(c, a, b); });
        w.violation = std::max(0.0, -g.normalized());
        return w;
      },
      kAgTol);
}

}  // namespace ncag
