#pragma once

// Numerical checks of the quantitative steps behind mutual-dominance
// rigidity: the Z^{1/2} sandwiches, the factorized differences, the compressed
// inverse (Schur complement) identity, spectral partitions of unity and the
// per-block bounds assembled from them; plus the Z^r sandwich for 0 < r < 1.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ncag/pdcore.hpp"

namespace ncag {

/// Relative slack for every ledger entry: lhs <= rhs + kBoundSlack * scale.
inline constexpr double kBoundSlack = 1e-10;

struct BoundRecord {
  std::string bound_id;  // sandwich or block bound name, or "final"
  double param = 0.0;    // t, block index or n
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  std::string variant;   // normalization tag where more than one is recorded
};

inline BoundRecord make_bound(std::string id, double param, double lhs, double rhs, double scale,
                              std::string variant = {}) {
  return {std::move(id), param, lhs, rhs, lhs <= rhs + kBoundSlack * scale, std::move(variant)};
}

/// lower <= middle <= upper, all functions of the same Z.
struct SandwichCheck {
  Matrix lower, middle, upper;
  double lower_gap = 0.0;  // lambda_min(middle - lower)
  double upper_gap = 0.0;  // lambda_min(upper - middle)
  BoundRecord record;

  bool satisfied() const { return record.satisfied; }
};

namespace detail {

inline SandwichCheck finish_sandwich(std::string id, double param, Matrix lower, Matrix middle,
                                     Matrix upper) {
  SandwichCheck s{symmetrize(lower), symmetrize(middle), symmetrize(upper), 0.0, 0.0, {}};
  s.lower_gap = lambda_min(s.middle - s.lower);
  s.upper_gap = lambda_min(s.upper - s.middle);
  const double scale = std::max({op_norm(s.lower), op_norm(s.middle), op_norm(s.upper)});
  // lhs is the worst violation; the sandwich holds when it is <= 0.
  s.record = make_bound(std::move(id), param, std::max(-s.lower_gap, -s.upper_gap), 0.0, scale);
  return s;
}

inline Matrix solve_spd(const Matrix& a, const Matrix& rhs) {
  Eigen::LDLT<Matrix> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw ConvergenceFailure("LDLT factorization failed");
  return ldlt.solve(rhs);
}

}  // namespace detail

/// 2tZ (t^2 Z + 1)^{-1} <= Z^{1/2} <= (t^2 Z + 1) / (2t).
inline SandwichCheck sandwich_sqrt(const PDMatrix& z, double t) {
  if (!(t > 0.0)) throw ConfigError("sandwich_sqrt: t must be > 0");
  const Index n = z.dim();
  const Matrix shifted = t * t * z.matrix() + Matrix::Identity(n, n);
  const Matrix lower = 2.0 * t * detail::solve_spd(shifted, z.matrix());
  const Matrix upper = shifted / (2.0 * t);
  return detail::finish_sandwich("sqrt", t, lower, z.power(0.5), upper);
}

/// 2t (t^2 Z + 1)^{-1} <= Z^{-1/2} <= (t^2 Z + 1)(2tZ)^{-1}.
inline SandwichCheck sandwich_inv_sqrt(const PDMatrix& z, double t) {
  if (!(t > 0.0)) throw ConfigError("sandwich_inv_sqrt: t must be > 0");
  const Index n = z.dim();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix shifted = t * t * z.matrix() + id;
  const Matrix lower = 2.0 * t * detail::solve_spd(shifted, id);
  const Matrix upper = detail::solve_spd(2.0 * t * z.matrix(), shifted);
  return detail::finish_sandwich("inv_sqrt", t, lower, z.power(-0.5), upper);
}

struct DifferenceResiduals {
  double residual_upper = 0.0;
  double residual_lower = 0.0;
  double scale_upper = 0.0;
  double scale_lower = 0.0;
};

/// Scalar factors of the two factorized differences,
///   (t^2 z + 1)/(2t) - 2tz/(t^2 z + 1)   = (t - z^{-1/2})^2 * upper_factor(z, t)
///   (t^2 z + 1)/(2tz) - 2t/(t^2 z + 1)   = (t - z^{-1/2})^2 * lower_factor(z, t)
inline double upper_factor(double z, double t) {
  const double s = t + 1.0 / std::sqrt(z);
  return z * z * s * s / (2.0 * t * (t * t * z + 1.0));
}
inline double lower_factor(double z, double t) {
  const double s = t + 1.0 / std::sqrt(z);
  return z * s * s / (2.0 * t * (t * t * z + 1.0));
}

/// Differences formed by dense solves, compared with the factorized forms
/// evaluated through the functional calculus (Frobenius residuals).
inline DifferenceResiduals difference_identity(const PDMatrix& z, double t) {
  if (!(t > 0.0)) throw ConfigError("difference_identity: t must be > 0");
  const Index n = z.dim();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix shifted = t * t * z.matrix() + id;

  const Matrix up_a = shifted / (2.0 * t);
  const Matrix up_b = 2.0 * t * detail::solve_spd(shifted, z.matrix());
  const Matrix lo_a = detail::solve_spd(2.0 * t * z.matrix(), shifted);
  const Matrix lo_b = 2.0 * t * detail::solve_spd(shifted, id);

  auto sq = [t](double v) {
    const double d = t - 1.0 / std::sqrt(v);
    return d * d;
  };
  const Matrix up_rhs = z.apply([&](double v) { return sq(v) * upper_factor(v, t); });
  const Matrix lo_rhs = z.apply([&](double v) { return sq(v) * lower_factor(v, t); });

  DifferenceResiduals r;
  r.residual_upper = (symmetrize(up_a - up_b) - up_rhs).norm();
  r.residual_lower = (symmetrize(lo_a - lo_b) - lo_rhs).norm();
  r.scale_upper = std::max(up_a.norm(), up_b.norm());
  r.scale_lower = std::max(lo_a.norm(), lo_b.norm());
  return r;
}

struct SchurResult {
  Matrix lhs;  // (P Y^{-1} P)^{-1} on range(P)
  Matrix rhs;  // PYP - PYP'(P'YP')^{-1}P'YP on range(P)
  double residual = 0.0;
};

/// Compressed-inverse identity, both sides expressed in P's stored basis.
inline SchurResult schur_complement(const PDMatrix& y, const Projection& p) {
  require_same_dim(y.dim(), p.dim(), "schur_complement");
  if (p.rank() == 0 || p.rank() >= p.dim()) {
    throw RankError("schur_complement: projection must have 0 < rank < dim");
  }
  const Matrix& u = p.basis();
  const Matrix v = p.complement_basis();
  const Matrix y_inv = y.apply([](double x) { return 1.0 / x; });
  SchurResult s;
  s.lhs = symmetrize(detail::solve_spd(u.transpose() * y_inv * u,
                                       Matrix::Identity(p.rank(), p.rank())));
  const Matrix yuu = u.transpose() * y.matrix() * u;
  const Matrix yuv = u.transpose() * y.matrix() * v;
  const Matrix yvv = v.transpose() * y.matrix() * v;
  s.rhs = symmetrize(yuu - yuv * detail::solve_spd(yvv, yuv.transpose()));
  s.residual = rel_frobenius(s.rhs, s.lhs);
  return s;
}

/// Spectral projections of Z grouped by binning the spectrum of Z^{-1/2}
/// into n half-open bins of width |Z^{-1/2}|/n over (0, |Z^{-1/2}|].
struct SpectralPartition {
  std::vector<Projection> projections;
  std::vector<double> lambdas;         // representative eigenvalue of Z^{-1/2} per block
  std::vector<Vector> block_values;    // eigenvalues of Z^{-1/2} in each block
  std::vector<std::size_t> bins;       // 1-based bin index per block
  std::size_t n = 1;
  double width = 0.0;
  double fineness = 0.0;               // max_i |(lambda_i - Z^{-1/2}) P_i|

  std::size_t size() const { return projections.size(); }
};

inline SpectralPartition build_partition(const PDMatrix& z, std::size_t n) {
  if (n == 0) throw ConfigError("build_partition: n must be >= 1");
  const EigenDecomp& e = z.eig();
  const Index dim = z.dim();
  Vector mu(dim);
  for (Index i = 0; i < dim; ++i) mu(i) = 1.0 / std::sqrt(e.eigenvalues(i));
  const double top = mu.maxCoeff();

  SpectralPartition part;
  part.n = n;
  part.width = top / static_cast<double>(n);
  std::vector<std::vector<Index>> members(n);
  for (Index i = 0; i < dim; ++i) {
    const double pos = mu(i) * static_cast<double>(n) / top;
    auto bin = static_cast<std::size_t>(std::ceil(pos));
    bin = std::clamp<std::size_t>(bin, 1, n);
    members[bin - 1].push_back(i);
  }
  for (std::size_t b = 0; b < n; ++b) {
    const auto& idx = members[b];
    if (idx.empty()) continue;
    Matrix basis(dim, static_cast<Index>(idx.size()));
    Vector vals(static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      basis.col(static_cast<Index>(k)) = e.eigenvectors.col(idx[k]);
      vals(static_cast<Index>(k)) = mu(idx[k]);
    }
    // representative: the member closest to the midpoint of the block's range
    const double mid = 0.5 * (vals.minCoeff() + vals.maxCoeff());
    Index best = 0;
    for (Index k = 1; k < vals.size(); ++k) {
      if (std::abs(vals(k) - mid) < std::abs(vals(best) - mid)) best = k;
    }
    const double lambda = vals(best);
    const double spread = (vals.array() - lambda).abs().maxCoeff();
    part.projections.emplace_back(std::move(basis));
    part.lambdas.push_back(lambda);
    part.block_values.push_back(std::move(vals));
    part.bins.push_back(b + 1);
    part.fineness = std::max(part.fineness, spread);
  }
  return part;
}

/// Constants of the block bounds and the per-bound records.
struct BoundLedger {
  std::vector<BoundRecord> records;
  std::size_t n = 0;
  double gamma = 0.0;       // sup of upper_factor over spec(Z) x spec(Z^{-1/2})
  double gamma_inv = 0.0;   // sup of lower_factor over the same set
  double correction = 0.0;  // max_i |(P_i Y^{-1} P_i)^{-1}| |Z^{1/2} P_i|
  double gamma_pp = 0.0;    // gamma + gamma_inv * correction

  bool all_satisfied() const {
    return std::all_of(records.begin(), records.end(),
                       [](const BoundRecord& r) { return r.satisfied; });
  }
  std::vector<const BoundRecord*> find(const std::string& id) const {
    std::vector<const BoundRecord*> out;
    for (const auto& r : records) {
      if (r.bound_id == id) out.push_back(&r);
    }
    return out;
  }
};

/// Every left-hand side of the per-block and assembled bounds on
/// |Y - Z^{1/2}|, with computed constants. The final bound is recorded in two
/// normalizations: "linear" uses |Z^{-1/2}|/n^2 in the first term,
/// "quadratic" uses |Z^{-1/2}|^2/n^2 as in the diagonal-part bound.
inline BoundLedger partition_bounds(const PDMatrix& y, const PDMatrix& z,
                                    const SpectralPartition& part) {
  require_same_dim(y.dim(), z.dim(), "partition_bounds");
  const Index dim = z.dim();
  const Matrix id = Matrix::Identity(dim, dim);

  Matrix sum_p = Matrix::Zero(dim, dim);
  for (const auto& p : part.projections) {
    require_same_dim(p.dim(), dim, "partition_bounds");
    const Matrix zu = z.matrix() * p.basis();
    const Matrix back = p.basis() * (p.basis().transpose() * zu);
    if ((zu - back).norm() > 1e-9 * z.norm() * std::sqrt(static_cast<double>(p.rank()))) {
      throw PartitionMismatch("partition_bounds: projection does not reduce Z");
    }
    sum_p += p.materialize();
  }
  if ((sum_p - id).norm() > 1e-9) {
    throw PartitionMismatch("partition_bounds: projections do not sum to the identity");
  }

  const EigenDecomp& ez = z.eig();
  const Matrix z_half = z.power(0.5);
  const Matrix y_inv = y.apply([](double v) { return 1.0 / v; });
  const Matrix z_neg_half = z.power(-0.5);
  const double norm_zmh = 1.0 / std::sqrt(z.min_eigenvalue());
  const double norm_y = y.norm();
  const double nn = static_cast<double>(part.n);
  const double scale = std::max(norm_y, std::sqrt(z.norm()));

  BoundLedger L;
  L.n = part.n;
  for (Index i = 0; i < dim; ++i) {
    const double zv = ez.eigenvalues(i);
    for (Index j = 0; j < dim; ++j) {
      const double t = 1.0 / std::sqrt(ez.eigenvalues(j));
      L.gamma = std::max(L.gamma, upper_factor(zv, t));
      L.gamma_inv = std::max(L.gamma_inv, lower_factor(zv, t));
    }
  }

  std::vector<Matrix> comp_inv(part.size());
  for (std::size_t b = 0; b < part.size(); ++b) {
    const Matrix& u = part.projections[b].basis();
    comp_inv[b] = symmetrize(detail::solve_spd(u.transpose() * y_inv * u,
                                               Matrix::Identity(u.cols(), u.cols())));
    L.correction = std::max(L.correction, op_norm(comp_inv[b]) * op_norm(z_half * u));
  }
  L.gamma_pp = L.gamma + L.gamma_inv * L.correction;

  Matrix block_diag = Matrix::Zero(dim, dim);
  Matrix off_diag = Matrix::Zero(dim, dim);
  for (std::size_t b = 0; b < part.size(); ++b) {
    const Matrix& u = part.projections[b].basis();
    const double delta = (part.block_values[b].array() - part.lambdas[b]).abs().maxCoeff();
    const double d2 = delta * delta;
    const double idx = static_cast<double>(b);
    const Matrix yuu = u.transpose() * y.matrix() * u;
    L.records.push_back(make_bound(
        "block_y", idx, op_norm(yuu - u.transpose() * z_half * u), L.gamma * d2, scale));
    L.records.push_back(make_bound(
        "block_y_inv", idx, op_norm(u.transpose() * (y_inv - z_neg_half) * u), L.gamma_inv * d2, scale));
    L.records.push_back(make_bound("block_compressed_inverse", idx, op_norm(yuu - comp_inv[b]), L.gamma_pp * d2, scale));
    const Matrix pp = u * u.transpose();
    block_diag += pp * y.matrix() * pp;
    off_diag += (id - pp) * y.matrix() * pp;
  }

  const double sqrt_term = std::sqrt(L.gamma_pp * norm_y * norm_zmh * norm_zmh / nn);
  L.records.push_back(make_bound("diagonal_part", nn, op_norm(block_diag - z_half),
                                 L.gamma * norm_zmh * norm_zmh / (nn * nn), scale));
  L.records.push_back(make_bound("off_diagonal_part", nn, op_norm(off_diag), sqrt_term, scale));
  const double final_lhs = op_norm(y.matrix() - z_half);
  L.records.push_back(make_bound("final", nn, final_lhs,
                                 L.gamma * norm_zmh / (nn * nn) + sqrt_term, scale, "linear"));
  L.records.push_back(make_bound("final", nn, final_lhs,
                                 L.gamma * norm_zmh * norm_zmh / (nn * nn) + sqrt_term, scale,
                                 "quadratic"));
  return L;
}

/// t^r Z (r t + (1-r) Z)^{-1} <= Z^r <= t^{r-1} (r Z + (1-r) t), 0 < r < 1.
inline SandwichCheck sandwich_r(const PDMatrix& z, double r, double t) {
  if (!(r > 0.0 && r < 1.0)) throw InvalidR("sandwich_r: r must lie in (0, 1)");
  if (!(t > 0.0)) throw ConfigError("sandwich_r: t must be > 0");
  const Index n = z.dim();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix lower =
      std::pow(t, r) * detail::solve_spd(r * t * id + (1.0 - r) * z.matrix(), z.matrix());
  const Matrix upper = std::pow(t, r - 1.0) * (r * z.matrix() + (1.0 - r) * t * id);
  return detail::finish_sandwich("r", t, lower, z.power(r), upper);
}

}  // namespace ncag
