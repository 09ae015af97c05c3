#pragma once

// Seeded generation of test matrices, unit vectors and projections.
//
// Every generator takes either an explicit seed or an engine reference;
// there is no global random state.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include "ncag/pdcore.hpp"

namespace ncag {

using Rng = std::mt19937_64;

enum class EnsembleKind { wishart, exp_gaussian, diagonal_dominant, commuting_pair, near_identity };

inline std::string_view to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::wishart: return "wishart";
    case EnsembleKind::exp_gaussian: return "exp_gaussian";
    case EnsembleKind::diagonal_dominant: return "diagonal_dominant";
    case EnsembleKind::commuting_pair: return "commuting_pair";
    case EnsembleKind::near_identity: return "near_identity";
  }
  return "unknown";
}

inline std::optional<EnsembleKind> parse_ensemble(std::string_view s) {
  for (auto k : {EnsembleKind::wishart, EnsembleKind::exp_gaussian,
                 EnsembleKind::diagonal_dominant, EnsembleKind::commuting_pair,
                 EnsembleKind::near_identity}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::wishart;
  Index dim = 2;
  double condition_cap = 100.0;
  std::uint64_t seed = 0;
  /// Perturbation size for near_identity; ignored otherwise.
  double epsilon = 0.1;
};

inline constexpr int kMaxGenerationRetries = 1000;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-trial seed: seed xor hash(tag, index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
  return seed ^ mix64(fnv1a(tag) ^ mix64(index));
}

inline Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, R diagonal made positive).
inline Matrix haar_orthogonal(Index n, Rng& rng) {
  const Matrix g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

/// Symmetric Gaussian matrix normalized to unit spectral norm.
inline Matrix unit_symmetric(Index n, Rng& rng) {
  const Matrix g = gaussian_matrix(n, n, rng);
  Matrix s = symmetrize(g);
  const Vector ev = sym_eigenvalues(s);
  const double nrm = std::max(std::abs(ev(0)), std::abs(ev(n - 1)));
  return nrm > 0.0 ? Matrix(s / nrm) : Matrix::Identity(n, n);
}

inline Vector log_uniform_spectrum(Index n, double cap, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, std::log(cap));
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = std::exp(u(rng));
  return d;
}

namespace detail {

inline PDMatrix sample_once(EnsembleKind kind, Index n, double cap, double eps, Rng& rng) {
  switch (kind) {
    case EnsembleKind::wishart: {
      const Index dof = 3 * n;
      const Matrix g = gaussian_matrix(n, dof, rng);
      return PDMatrix(g * g.transpose() / static_cast<double>(dof));
    }
    case EnsembleKind::exp_gaussian: {
      const Matrix s = symmetrize(gaussian_matrix(n, n, rng));
      const EigenDecomp e = sym_eig(s);
      const double spread = e.eigenvalues(n - 1) - e.eigenvalues(0);
      const double limit = 0.95 * std::log(cap);
      const double scale = spread > limit ? limit / spread : 1.0;
      Vector values(n);
      for (Index i = 0; i < n; ++i) values(i) = std::exp(scale * e.eigenvalues(i));
      return PDMatrix::from_spectrum(e.eigenvectors, values);
    }
    case EnsembleKind::diagonal_dominant: {
      std::uniform_real_distribution<double> off(-1.0, 1.0);
      std::uniform_real_distribution<double> slack(0.1, 2.0);
      Matrix m = Matrix::Zero(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) m(i, j) = m(j, i) = off(rng);
      for (Index i = 0; i < n; ++i) m(i, i) = m.row(i).cwiseAbs().sum() + slack(rng);
      return PDMatrix(m);
    }
    case EnsembleKind::commuting_pair: {
      const Matrix q = haar_orthogonal(n, rng);
      return PDMatrix::from_spectrum(q, log_uniform_spectrum(n, cap, rng));
    }
    case EnsembleKind::near_identity: {
      if (eps == 0.0) return PDMatrix::identity(n);
      const Matrix s = unit_symmetric(n, rng);
      return PDMatrix(Matrix::Identity(n, n) + eps * s);
    }
  }
  throw GenerationFailure("unknown ensemble kind");
}

}  // namespace detail

/// Rejection attempts before sample_pd falls back to compressing the spectrum.
inline constexpr int kRejectionAttempts = 64;

/// Shrinks the log-spectrum of `a` about its mean until cond <= cap; the
/// eigenbasis is kept.
inline PDMatrix compress_condition(const PDMatrix& a, double cap) {
  const EigenDecomp& e = a.eig();
  const Index n = a.dim();
  const double lo = std::log(e.eigenvalues(0)), hi = std::log(e.eigenvalues(n - 1));
  const double mid = 0.5 * (lo + hi);
  const double limit = 0.95 * std::log(cap);
  const double scale = hi - lo > limit ? limit / (hi - lo) : 1.0;
  Vector values(n);
  for (Index i = 0; i < n; ++i) {
    values(i) = std::exp(mid + scale * (std::log(e.eigenvalues(i)) - mid));
  }
  return PDMatrix::from_spectrum(e.eigenvectors, values);
}

/// Draws a PD matrix from the ensemble, resampling until cond <= cap. Caps too
/// tight for rejection (wishart or diagonal_dominant near cap 1) fall back to
/// compressing the spectrum of a fresh draw.
inline PDMatrix sample_pd(EnsembleKind kind, Index dim, double cap, Rng& rng,
                          double epsilon = 0.1) {
  if (dim < 1 || !(cap >= 1.0)) {
    throw GenerationFailure("sample_pd: need dim >= 1 and condition_cap >= 1");
  }
  for (int attempt = 0; attempt < kMaxGenerationRetries; ++attempt) {
    try {
      PDMatrix a = detail::sample_once(kind, dim, cap, epsilon, rng);
      if (a.condition() <= cap) return a;
      if (attempt >= kRejectionAttempts) {
        PDMatrix c = compress_condition(a, cap);
        if (c.condition() <= cap) return c;
      }
    } catch (const NonPositiveSpectrum&) {
      // resample
    }
  }
  throw GenerationFailure("sample_pd: condition cap " + std::to_string(cap) +
                          " not met after retries (" + std::string(to_string(kind)) + ")");
}

inline PDMatrix random_pd(const EnsembleSpec& spec) {
  Rng rng(spec.seed);
  return sample_pd(spec.kind, spec.dim, spec.condition_cap, rng, spec.epsilon);
}

/// Two matrices sharing a Haar-random eigenbasis; each has cond <= cap.
inline std::pair<PDMatrix, PDMatrix> sample_commuting_pair(Index dim, double cap, Rng& rng) {
  const Matrix q = haar_orthogonal(dim, rng);
  const Vector d1 = log_uniform_spectrum(dim, cap, rng);
  const Vector d2 = log_uniform_spectrum(dim, cap, rng);
  return {PDMatrix::from_spectrum(q, d1), PDMatrix::from_spectrum(q, d2)};
}

inline std::pair<PDMatrix, PDMatrix> random_commuting_pair(const EnsembleSpec& spec) {
  Rng rng(spec.seed);
  return sample_commuting_pair(spec.dim, spec.condition_cap, rng);
}

inline UnitVector sample_unit_vector(Index dim, Rng& rng) {
  for (;;) {
    Vector v = gaussian_matrix(dim, 1, rng).col(0);
    if (v.norm() > 1e-8) return UnitVector(v);
  }
}

inline UnitVector random_unit_vector(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return sample_unit_vector(dim, rng);
}

inline Projection sample_projection(Index dim, Index rank, Rng& rng) {
  if (rank < 0 || rank > dim) throw RankError("sample_projection: rank out of range");
  return Projection(haar_orthogonal(dim, rng).leftCols(rank));
}

inline Projection random_projection(Index dim, Index rank, std::uint64_t seed) {
  Rng rng(seed);
  return sample_projection(dim, rank, rng);
}

}  // namespace ncag
