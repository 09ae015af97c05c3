#pragma once

// The r-mean, its A-side form, the rival two-variable maps, and sampled
// checkers for homogeneity, inversion and the commuting-value condition.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncag/parallel.hpp"
#include "ncag/pdcore.hpp"
#include "ncag/random.hpp"

namespace ncag {

/// Relative error below which an axiom is considered to hold.
inline constexpr double kAxiomTol = 1e-9;
/// Violations above this are preferred when picking the reported witness.
inline constexpr double kAxiomWitnessTol = 1e-6;

enum class MeanTag { r_mean, r_mean_dual, naive_power, exotic, conjugated };

inline std::string_view to_string(MeanTag t) {
  switch (t) {
    case MeanTag::r_mean: return "r_mean";
    case MeanTag::r_mean_dual: return "r_mean_dual";
    case MeanTag::naive_power: return "naive_power";
    case MeanTag::exotic: return "exotic";
    case MeanTag::conjugated: return "conjugated";
  }
  return "unknown";
}

inline std::optional<MeanTag> parse_mean_tag(std::string_view s) {
  for (auto t : {MeanTag::r_mean, MeanTag::r_mean_dual, MeanTag::naive_power,
                 MeanTag::exotic, MeanTag::conjugated}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

/// A two-variable map M(A, B) standing in for a^r b^(1-r).
class MeanCandidate {
 public:
  MeanCandidate(MeanTag tag, double r) : tag_(tag), r_(r) {
    if (!std::isfinite(r) || !(r > 0.0)) throw InvalidR("MeanCandidate: r must be > 0");
    if (r == 1.0) throw InvalidR("MeanCandidate: r = 1 degenerates every candidate to A");
  }

  MeanTag tag() const { return tag_; }
  double r() const { return r_; }
  std::string name() const { return std::string(to_string(tag_)); }

 private:
  MeanTag tag_;
  double r_;
};

namespace detail {

inline Matrix pd_power(const Matrix& sym, double s, const char* where) {
  const EigenDecomp e = sym_eig(sym);
  if (!(e.eigenvalues(0) > 0.0)) {
    throw NonPositiveSpectrum(std::string(where) + ": intermediate lost positivity");
  }
  return spectral_apply(e, [s](double x) { return std::pow(x, s); });
}

// C^{1/2} (C^{-1/2} D C^{-1/2})^s C^{1/2}
inline Matrix congruence_power(const PDMatrix& c, const PDMatrix& d, double s, const char* where) {
  const Matrix half = c.apply([](double x) { return std::sqrt(x); });
  const Matrix neg_half = c.apply([](double x) { return 1.0 / std::sqrt(x); });
  const Matrix inner = symmetrize(neg_half * d.matrix() * neg_half);
  return half * pd_power(inner, s, where) * half;
}

}  // namespace detail

/// B^{1/2} (B^{-1/2} A B^{-1/2})^r B^{1/2}.
inline PDMatrix r_mean(const PDMatrix& a, const PDMatrix& b, double r) {
  require_same_dim(a.dim(), b.dim(), "r_mean");
  return PDMatrix(detail::congruence_power(b, a, r, "r_mean"));
}

/// A^{1/2} (A^{-1/2} B A^{-1/2})^{1-r} A^{1/2}; equal to r_mean(A, B, r).
inline PDMatrix r_mean_dual(const PDMatrix& a, const PDMatrix& b, double r) {
  require_same_dim(a.dim(), b.dim(), "r_mean_dual");
  return PDMatrix(detail::congruence_power(a, b, 1.0 - r, "r_mean_dual"));
}

inline PDMatrix eval_candidate(const MeanCandidate& c, const PDMatrix& a, const PDMatrix& b) {
  require_same_dim(a.dim(), b.dim(), "eval_candidate");
  const double r = c.r();
  switch (c.tag()) {
    case MeanTag::r_mean:
      return r_mean(a, b, r);
    case MeanTag::r_mean_dual:
      return r_mean_dual(a, b, r);
    case MeanTag::naive_power: {
      // A^{r/2} B^{1-r} A^{r/2}
      const Matrix ah = a.power(0.5 * r);
      return PDMatrix(ah * b.power(1.0 - r) * ah);
    }
    case MeanTag::exotic: {
      // B^{(1+2r)/2} (B^6 A^{-2} B^6)^{-r/2} B^{(1+2r)/2}
      const Matrix outer = b.power(0.5 * (1.0 + 2.0 * r));
      const Matrix b6 = b.power(6.0);
      const Matrix inner = symmetrize(b6 * a.power(-2.0) * b6);
      return PDMatrix(outer * detail::pd_power(inner, -0.5 * r, "exotic") * outer);
    }
    case MeanTag::conjugated: {
      // C^2 A^{r/2} C^{-2} B^{1-r} C^{-2} A^{r/2} C^2 with C = A^3 + 2B
      const EigenDecomp ce = sym_eig(symmetrize(a.power(3.0) + 2.0 * b.matrix()));
      const Matrix c2 = spectral_apply(ce, [](double x) { return x * x; });
      const Matrix cm2 = spectral_apply(ce, [](double x) { return 1.0 / (x * x); });
      const Matrix ah = a.power(0.5 * r);
      // L L^T keeps the product symmetric PSD in floating point; C^4 makes the
      // output far worse conditioned than the inputs, so only strict
      // positivity is required.
      const Matrix l = c2 * ah * cm2 * b.power(0.5 * (1.0 - r));
      return PDMatrix(l * l.transpose(), 0.0);
    }
  }
  throw InvalidR("eval_candidate: unknown tag");
}

enum class Axiom { homogeneity, inversion, commuting_value, ag_bound };

inline std::string_view to_string(Axiom a) {
  switch (a) {
    case Axiom::homogeneity: return "homogeneity";
    case Axiom::inversion: return "inversion";
    case Axiom::commuting_value: return "commuting_value";
    case Axiom::ag_bound: return "ag_bound";
  }
  return "unknown";
}

struct AxiomWitness {
  Matrix a;
  Matrix b;
  double t = 1.0;
  std::size_t trial = 0;
  double violation = 0.0;
};

struct AxiomReport {
  Axiom axiom = Axiom::homogeneity;
  double max_violation = 0.0;
  std::optional<AxiomWitness> witness;
  std::size_t trials = 0;

  bool passed(double tol = kAxiomTol) const { return max_violation <= tol; }
};

/// Sampling plan shared by the axiom checkers.
struct AxiomCampaign {
  std::size_t trials = 100;
  std::vector<Index> dims{2, 3, 4};
  std::vector<double> t_grid{0.1, 0.5, 2.0, 10.0};
  std::uint64_t seed = 0;
  EnsembleKind ensemble = EnsembleKind::wishart;
  double condition_cap = 100.0;
  unsigned workers = 1;
};

/// An evaluation error raised while checking a sampled input.
class SampleError : public Error {
 public:
  SampleError(const std::string& what, AxiomWitness sample)
      : Error(what), sample_(std::move(sample)) {}
  const AxiomWitness& sample() const { return sample_; }

 private:
  AxiomWitness sample_;
};

namespace detail {

inline Index campaign_dim(const AxiomCampaign& c, std::size_t trial) {
  if (c.dims.empty()) throw ConfigError("axiom campaign: empty dims");
  return c.dims[trial % c.dims.size()];
}

// Runs trial_fn over the campaign and merges per-trial witnesses by max.
// Witness: first trial above kAxiomWitnessTol, else the worst above pass_tol.
// NaN violations are mapped to +inf so they always surface.
template <class TrialFn>
AxiomReport run_axiom_campaign(Axiom axiom, const AxiomCampaign& c, TrialFn&& trial_fn,
                               double pass_tol = kAxiomTol) {
  auto per_trial = parallel_map(c.trials, c.workers, [&](std::size_t i) -> AxiomWitness {
    Rng rng(derive_seed(c.seed, to_string(axiom), i));
    AxiomWitness w = trial_fn(i, campaign_dim(c, i), rng);
    if (std::isnan(w.violation)) w.violation = std::numeric_limits<double>::infinity();
    return w;
  });
  AxiomReport report{axiom, 0.0, std::nullopt, c.trials};
  const AxiomWitness* worst = nullptr;
  const AxiomWitness* first_large = nullptr;
  for (const auto& w : per_trial) {
    if (!worst || w.violation > worst->violation) worst = &w;
    if (!first_large && w.violation > kAxiomWitnessTol) first_large = &w;
  }
  if (worst) report.max_violation = worst->violation;
  if (report.max_violation > pass_tol) {
    report.witness = first_large ? *first_large : *worst;
  }
  return report;
}

template <class Fn>
auto with_sample(const AxiomWitness& sample, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw SampleError(e.what(), sample);
  }
}

}  // namespace detail

/// max over samples of ||M(tA,B) - t^r M(A,B)||_F / ||t^r M(A,B)||_F.
inline double homogeneity_violation(const MeanCandidate& c, const PDMatrix& a,
                                    const PDMatrix& b, double t) {
  if (!(t > 0.0)) throw ConfigError("homogeneity: t must be positive");
  const Matrix scaled = std::pow(t, c.r()) * eval_candidate(c, a, b).matrix();
  const Matrix lhs = eval_candidate(c, PDMatrix(t * a.matrix()), b).matrix();
  return rel_frobenius(lhs, scaled);
}

inline double inversion_violation(const MeanCandidate& c, const PDMatrix& a, const PDMatrix& b) {
  const PDMatrix m = eval_candidate(c, a, b);
  const Matrix inv_m = m.apply([](double x) { return 1.0 / x; });
  const PDMatrix a_inv = spectral_fn(a, SpectralFn::inverse());
  const PDMatrix b_inv = spectral_fn(b, SpectralFn::inverse());
  return rel_frobenius(inv_m, eval_candidate(c, a_inv, b_inv).matrix());
}

/// Relative error of M(A,B) against A^r B^(1-r); meaningful only for commuting A, B.
inline double commuting_value_violation(const MeanCandidate& c, const PDMatrix& a,
                                        const PDMatrix& b) {
  const Matrix expected = symmetrize(a.power(c.r()) * b.power(1.0 - c.r()));
  return rel_frobenius(eval_candidate(c, a, b).matrix(), expected);
}

inline AxiomReport check_homogeneity(const MeanCandidate& c, const AxiomCampaign& plan) {
  for (double t : plan.t_grid) {
    if (!(t > 0.0)) throw ConfigError("check_homogeneity: t_grid must be positive");
  }
  return detail::run_axiom_campaign(
      Axiom::homogeneity, plan, [&](std::size_t i, Index dim, Rng& rng) {
        const PDMatrix a = sample_pd(plan.ensemble, dim, plan.condition_cap, rng);
        const PDMatrix b = sample_pd(plan.ensemble, dim, plan.condition_cap, rng);
        AxiomWitness w{a.matrix(), b.matrix(), 1.0, i, 0.0};
        for (double t : plan.t_grid) {
          AxiomWitness probe{a.matrix(), b.matrix(), t, i, 0.0};
          const double v =
              detail::with_sample(probe, [&] { return homogeneity_violation(c, a, b, t); });
          if (std::isnan(v) || v > w.violation) {
            w.violation = v;
            w.t = t;
          }
        }
        return w;
      });
}

inline AxiomReport check_inversion(const MeanCandidate& c, const AxiomCampaign& plan) {
  return detail::run_axiom_campaign(
      Axiom::inversion, plan, [&](std::size_t i, Index dim, Rng& rng) {
        const PDMatrix a = sample_pd(plan.ensemble, dim, plan.condition_cap, rng);
        const PDMatrix b = sample_pd(plan.ensemble, dim, plan.condition_cap, rng);
        AxiomWitness w{a.matrix(), b.matrix(), 1.0, i, 0.0};
        w.violation = detail::with_sample(w, [&] { return inversion_violation(c, a, b); });
        return w;
      });
}

/// Samples commuting pairs only (shared Haar eigenbasis).
inline AxiomReport check_commuting_value(const MeanCandidate& c, const AxiomCampaign& plan) {
  return detail::run_axiom_campaign(
      Axiom::commuting_value, plan, [&](std::size_t i, Index dim, Rng& rng) {
        const auto [a, b] = sample_commuting_pair(dim, plan.condition_cap, rng);
        AxiomWitness w{a.matrix(), b.matrix(), 1.0, i, 0.0};
        w.violation =
            detail::with_sample(w, [&] { return commuting_value_violation(c, a, b); });
        return w;
      });
}

}  // namespace ncag
