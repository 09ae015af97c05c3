#pragma once

// Seeded verification campaigns.
//
// A suite expands its configuration into tasks (trial x dim x r), each task
// samples inputs from its own derived seed and evaluates a fixed list of
// named quantities. Every quantity is a pure function of the sampled inputs,
// so a failing record can be persisted as a witness file and recomputed
// later from that file alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncag/inequalities.hpp"
#include "ncag/json_io.hpp"
#include "ncag/means.hpp"
#include "ncag/parallel.hpp"
#include "ncag/pdcore.hpp"
#include "ncag/proofcheck.hpp"
#include "ncag/quasiorder.hpp"
#include "ncag/random.hpp"
#include "ncag/report.hpp"
#include "ncag/search.hpp"

namespace ncag {

enum class Suite {
  dual_form,
  axioms,
  ag,
  certificates,
  quasiorder,
  rigidity,
  squaring,
  proofcheck,
  search_ag,
  search_transitivity
};

inline constexpr Suite kAllSuites[] = {
    Suite::dual_form,     Suite::axioms,   Suite::ag,         Suite::certificates,
    Suite::quasiorder, Suite::rigidity, Suite::squaring,   Suite::proofcheck,
    Suite::search_ag,  Suite::search_transitivity};

inline std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::dual_form: return "dual_form";
    case Suite::axioms: return "axioms";
    case Suite::ag: return "ag";
    case Suite::certificates: return "certificates";
    case Suite::quasiorder: return "quasiorder";
    case Suite::rigidity: return "rigidity";
    case Suite::squaring: return "squaring";
    case Suite::proofcheck: return "proofcheck";
    case Suite::search_ag: return "search_ag";
    case Suite::search_transitivity: return "search_transitivity";
  }
  return "unknown";
}

inline std::optional<Suite> parse_suite(std::string_view s) {
  for (Suite x : kAllSuites) {
    if (to_string(x) == s) return x;
  }
  return std::nullopt;
}

struct ExperimentConfig {
  Suite suite = Suite::dual_form;
  std::vector<Index> dims{2, 3, 4};
  /// Empty means the suite default.
  std::vector<double> r_values;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  Tolerances tol{};
  EnsembleKind ensemble = EnsembleKind::wishart;
  double condition_cap = 100.0;
  MeanTag candidate = MeanTag::r_mean;
  std::string out_path;
  std::string csv_path;
  unsigned workers = 1;
  /// Transitivity margin.
  double margin = 1e-4;
  /// Random vectors added to the certificate vector set.
  std::size_t random_vectors = 64;
};

inline std::vector<double> default_r_values(Suite s) {
  switch (s) {
    case Suite::dual_form: return {0.3, 0.5, 0.9, 1.5, 2.0, 2.7, 3.0};
    case Suite::axioms:
    case Suite::ag: return {0.5, 2.0, 3.0};
    case Suite::certificates: return {1.5, 2.0, 2.5, 3.0};
    case Suite::proofcheck: return {0.25, 0.5, 0.75};
    case Suite::search_ag: return {3.0};
    default: return {};
  }
}

inline std::vector<double> effective_r_values(const ExperimentConfig& cfg) {
  return cfg.r_values.empty() ? default_r_values(cfg.suite) : cfg.r_values;
}

/// Throws ConfigError when the configuration cannot be run.
inline void validate(const ExperimentConfig& cfg) {
  const std::string name(to_string(cfg.suite));
  if (cfg.dims.empty()) throw ConfigError(name + ": dims must not be empty");
  for (Index d : cfg.dims) {
    if (d < 2) throw ConfigError(name + ": every dim must be >= 2");
  }
  if (cfg.trials == 0 && cfg.suite != Suite::search_transitivity) {
    throw ConfigError(name + ": trials must be >= 1");
  }
  if (!(cfg.condition_cap >= 1.0)) throw ConfigError(name + ": condition cap must be >= 1");
  if (!(cfg.tol.pd > 0.0) || !(cfg.tol.order > 0.0) || !(cfg.tol.qo > 0.0)) {
    throw ConfigError(name + ": tolerances must be positive");
  }
  for (double r : effective_r_values(cfg)) {
    if (!std::isfinite(r) || !(r > 0.0) || r == 1.0) {
      throw ConfigError(name + ": r must be positive and different from 1");
    }
    if (cfg.suite == Suite::certificates && !(r > 1.0)) {
      throw ConfigError("certificates: certificates need r > 1");
    }
    if (cfg.suite == Suite::proofcheck && !(r < 1.0)) {
      throw ConfigError("proofcheck: the Z^r sandwich needs 0 < r < 1");
    }
  }
  if (cfg.suite == Suite::search_ag && cfg.candidate != MeanTag::naive_power &&
      cfg.candidate != MeanTag::exotic) {
    throw ConfigError("search_ag: candidate must be naive_power or exotic");
  }
  if (cfg.suite == Suite::search_transitivity && !(cfg.margin > 0.0)) {
    throw ConfigError("search_transitivity: margin must be > 0");
  }
}

// ---------------------------------------------------------------------------
// Quantities

/// Everything a quantity needs to be recomputed.
struct WitnessInputs {
  std::map<std::string, Matrix> mats;
  std::map<std::string, double> params;
  std::vector<Vector> vectors;

  PDMatrix pd(const std::string& k) const { return PDMatrix(mat(k)); }
  const Matrix& mat(const std::string& k) const {
    auto it = mats.find(k);
    if (it == mats.end()) throw IoError("witness input missing matrix " + k);
    return it->second;
  }
  double param(const std::string& k) const {
    auto it = params.find(k);
    if (it == params.end()) throw IoError("witness input missing parameter " + k);
    return it->second;
  }
};

struct EvalContext {
  MeanTag candidate = MeanTag::r_mean;
  Tolerances tol{};

  QuasiOrderOptions qo() const {
    QuasiOrderOptions o;
    o.qo_tol = tol.qo;
    return o;
  }
};

struct Quantity {
  std::string_view name;
  double (*eval)(const WitnessInputs&, const EvalContext&);
  bool (*pass)(double, const EvalContext&);
};

/// Squaring threshold: q(X^2, Y^2) >= 1 - kSquaringTol when q(X, Y) >= 1.
inline constexpr double kSquaringTol = 1e-9;
inline constexpr double kMethodAgreementTol = 1e-6;
inline constexpr double kCertificateTol = 1e-8;
inline constexpr double kPencilGapTol = 1e-8;
inline constexpr double kSelfQTol = 1e-10;
inline constexpr double kScaleInvarianceTol = 1e-10;
inline constexpr double kProofTol = 1e-10;
inline constexpr double kFinenessSlack = 1e-12;

namespace quantities {

inline MeanCandidate candidate(const WitnessInputs& in, const EvalContext& ctx) {
  return MeanCandidate(ctx.candidate, in.param("r"));
}

inline double sandwich_violation(const SandwichCheck& s) {
  const double scale = std::max({op_norm(s.lower), op_norm(s.middle), op_norm(s.upper)});
  return std::max({0.0, -s.lower_gap, -s.upper_gap}) / scale;
}

inline double final_rhs(const BoundLedger& l) {
  for (const auto* r : l.find("final")) {
    if (r->variant == "linear") return r->rhs;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

inline const std::vector<std::size_t>& partition_sizes() {
  static const std::vector<std::size_t> sizes{2, 4, 8, 16};
  return sizes;
}

}  // namespace quantities

inline const std::vector<Quantity>& quantity_registry() {
  using namespace quantities;
  static const std::vector<Quantity> reg = {
      {"dual_form_rel_dist",
       [](const WitnessInputs& in, const EvalContext&) {
         const PDMatrix a = in.pd("A"), b = in.pd("B");
         const double r = in.param("r");
         return rel_frobenius(r_mean_dual(a, b, r).matrix(), r_mean(a, b, r).matrix());
       },
       [](double v, const EvalContext&) { return v <= kAxiomTol; }},
      {"homogeneity",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         return homogeneity_violation(candidate(in, ctx), in.pd("A"), in.pd("B"), in.param("t"));
       },
       [](double v, const EvalContext&) { return v <= kAxiomTol; }},
      {"inversion",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         return inversion_violation(candidate(in, ctx), in.pd("A"), in.pd("B"));
       },
       [](double v, const EvalContext&) { return v <= kAxiomTol; }},
      {"commuting_value",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         return commuting_value_violation(candidate(in, ctx), in.pd("A"), in.pd("B"));
       },
       [](double v, const EvalContext&) { return v <= kAxiomTol; }},
      {"ag_gap",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         return ag_gap(candidate(in, ctx), in.pd("A"), in.pd("B"), ctx.tol.order).normalized();
       },
       [](double v, const EvalContext&) { return v >= -kAgTol; }},
      {"certificate_min",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         std::vector<UnitVector> vs;
         for (const auto& v : in.vectors) vs.emplace_back(v);
         return state_certificate(candidate(in, ctx), in.pd("A"), in.pd("B"), vs);
       },
       [](double v, const EvalContext&) { return v >= 1.0 - kCertificateTol; }},
      {"method_agreement",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         return q_value(in.pd("X"), in.pd("Y"), ctx.qo()).method_agreement;
       },
       [](double v, const EvalContext&) { return v <= kMethodAgreementTol; }},
      {"pencil_equivalence_mismatch",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         const PDMatrix x = in.pd("X"), y = in.pd("Y");
         const QuasiOrderOptions o = ctx.qo();
         const bool holds = q_value(x, y, o).holds;
         const PencilGap l = pencil_gap_scan(x, y, make_t_grid(x, y, o.grid_points));
         return holds == (l.min_gap >= -kPencilGapTol) ? 0.0 : 1.0;
       },
       [](double v, const EvalContext&) { return v == 0.0; }},
      {"scale_invariance",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         const PDMatrix x = in.pd("X"), y = in.pd("Y");
         const double s = in.param("s");
         const double q0 = q_scan(x, y, ctx.qo());
         const double q1 = q_scan(PDMatrix(s * x.matrix()), PDMatrix(s * y.matrix()), ctx.qo());
         return std::abs(q1 - q0) / q0;
       },
       [](double v, const EvalContext&) { return v <= kScaleInvarianceTol; }},
      {"basis_upper_bound",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         // q <= <X e,e><Y^{-1} e,e> for every basis vector e
         const PDMatrix x = in.pd("X"), y = in.pd("Y");
         const Matrix w = y.apply([](double v) { return 1.0 / v; });
         double best = std::numeric_limits<double>::infinity();
         for (Index i = 0; i < x.dim(); ++i) best = std::min(best, x(i, i) * w(i, i));
         const double q = q_scan(x, y, ctx.qo());
         return (q - best) / best;
       },
       [](double v, const EvalContext&) { return v <= kProofTol; }},
      {"loewner_implies_quasi",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         return q_scan(in.pd("X"), in.pd("Y"), ctx.qo());
       },
       [](double v, const EvalContext& ctx) { return v >= 1.0 - ctx.tol.qo; }},
      {"block_schur_mismatch",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         const BlockCheck b = block_pd_check(in.pd("A"), in.mat("B"), in.pd("C"), ctx.tol.order);
         return b.block_psd == b.schur_psd ? 0.0 : 1.0;
       },
       [](double v, const EvalContext&) { return v == 0.0; }},
      {"rigidity_min_q",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         const MutualDominance m = mutual_dominance(in.pd("X"), in.pd("Y"), ctx.qo());
         return std::min(m.q_xy, m.q_yx);
       },
       [](double v, const EvalContext& ctx) { return v < 1.0 - ctx.tol.qo; }},
      {"self_q",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         const PDMatrix x = in.pd("X");
         return std::abs(q_scan(x, x, ctx.qo()) - 1.0);
       },
       [](double v, const EvalContext&) { return v <= kSelfQTol; }},
      {"squaring_q2",
       [](const WitnessInputs& in, const EvalContext& ctx) {
         const SquaringResult s = squaring_check(in.pd("X"), in.pd("Y"), ctx.qo());
         // pairs outside the hypothesis are vacuous
         return s.q1 >= 1.0 - ctx.tol.qo ? s.q2 : std::numeric_limits<double>::infinity();
       },
       [](double v, const EvalContext&) { return v >= 1.0 - kSquaringTol; }},
      {"difference_residual",
       [](const WitnessInputs& in, const EvalContext&) {
         const DifferenceResiduals d = difference_identity(in.pd("Z"), in.param("t"));
         return std::max(d.residual_upper / d.scale_upper, d.residual_lower / d.scale_lower);
       },
       [](double v, const EvalContext&) { return v <= kProofTol; }},
      {"sandwich_sqrt",
       [](const WitnessInputs& in, const EvalContext&) {
         const PDMatrix z = in.pd("Z");
         const double t = in.param("t");
         return std::max(sandwich_violation(sandwich_sqrt(z, t)),
                         sandwich_violation(sandwich_inv_sqrt(z, t)));
       },
       [](double v, const EvalContext&) { return v <= kProofTol; }},
      {"sandwich_r",
       [](const WitnessInputs& in, const EvalContext&) {
         return sandwich_violation(sandwich_r(in.pd("Z"), in.param("r"), in.param("t")));
       },
       [](double v, const EvalContext&) { return v <= kProofTol; }},
      {"schur_residual",
       [](const WitnessInputs& in, const EvalContext&) {
         const PDMatrix y = in.pd("Y");
         Matrix basis(y.dim(), static_cast<Index>(in.vectors.size()));
         for (std::size_t k = 0; k < in.vectors.size(); ++k) {
           basis.col(static_cast<Index>(k)) = in.vectors[k];
         }
         return schur_complement(y, Projection(basis)).residual;
       },
       [](double v, const EvalContext&) { return v <= kProofTol; }},
      {"partition_fineness_ratio",
       [](const WitnessInputs& in, const EvalContext&) {
         const PDMatrix z = in.pd("Z");
         const auto n = static_cast<std::size_t>(in.param("n"));
         const SpectralPartition p = build_partition(z, n);
         const double bound = (1.0 / std::sqrt(z.min_eigenvalue())) / static_cast<double>(n);
         return p.fineness / bound;
       },
       [](double v, const EvalContext&) { return v <= 1.0 + kFinenessSlack; }},
      {"bounds_lhs_exact",
       [](const WitnessInputs& in, const EvalContext&) {
         // Y = Z^{1/2}: every per-block and partial left-hand side vanishes
         const PDMatrix z = in.pd("Z");
         const PDMatrix y = spectral_fn(z, SpectralFn::sqrt());
         const BoundLedger l =
             partition_bounds(y, z, build_partition(z, static_cast<std::size_t>(in.param("n"))));
         double worst = 0.0;
         for (const auto& r : l.records) {
           if (r.bound_id != "final") worst = std::max(worst, r.lhs);
         }
         return worst;
       },
       [](double v, const EvalContext&) { return v <= kProofTol; }},
      {"final_rhs_step",
       [](const WitnessInputs& in, const EvalContext&) {
         // largest change of the assembled bound between consecutive n; < 0 means decreasing
         const PDMatrix z = in.pd("Z");
         const PDMatrix y = spectral_fn(z, SpectralFn::sqrt());
         double prev = std::numeric_limits<double>::quiet_NaN();
         double worst = -std::numeric_limits<double>::infinity();
         for (std::size_t n : partition_sizes()) {
           const double rhs = final_rhs(partition_bounds(y, z, build_partition(z, n)));
           if (!std::isnan(prev)) worst = std::max(worst, rhs - prev);
           prev = rhs;
         }
         return worst;
       },
       [](double v, const EvalContext&) { return v < 0.0; }},
  };
  return reg;
}

inline const Quantity& find_quantity(std::string_view name) {
  for (const auto& q : quantity_registry()) {
    if (q.name == name) return q;
  }
  throw ConfigError("unknown quantity " + std::string(name));
}

// ---------------------------------------------------------------------------
// Witness files

inline Json witness_to_json(const TrialRecord& rec, const WitnessInputs& in,
                            const EvalContext& ctx) {
  Json mats = Json::object();
  for (const auto& [k, m] : in.mats) mats[k] = matrix_to_json(m);
  Json params = Json::object();
  for (const auto& [k, v] : in.params) params[k] = v;
  Json vecs = Json::array();
  for (const auto& v : in.vectors) vecs.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return Json{{"suite", rec.suite},
              {"quantity", rec.quantity},
              {"trial_index", rec.trial_index},
              {"seed", rec.seed},
              {"dim", rec.dim},
              {"candidate", std::string(to_string(ctx.candidate))},
              {"tolerances", {{"pd", ctx.tol.pd}, {"order", ctx.tol.order}, {"qo", ctx.tol.qo}}},
              {"value", rec.value},
              {"pass", rec.pass},
              {"inputs", std::move(mats)},
              {"params", std::move(params)},
              {"vectors", std::move(vecs)}};
}

/// Reloads a witness file's inputs and re-evaluates its quantity.
inline double recompute_witness(const Json& j) {
  try {
    WitnessInputs in;
    for (const auto& [k, m] : j.at("inputs").items()) in.mats[k] = matrix_from_json(m);
    for (const auto& [k, v] : j.at("params").items()) in.params[k] = v.get<double>();
    for (const auto& v : j.at("vectors")) {
      const auto xs = v.get<std::vector<double>>();
      in.vectors.emplace_back(Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size())));
    }
    EvalContext ctx;
    const auto tag = parse_mean_tag(j.at("candidate").get<std::string>());
    if (!tag) throw IoError("witness: unknown candidate");
    ctx.candidate = *tag;
    ctx.tol.pd = j.at("tolerances").at("pd").get<double>();
    ctx.tol.order = j.at("tolerances").at("order").get<double>();
    ctx.tol.qo = j.at("tolerances").at("qo").get<double>();
    return find_quantity(j.at("quantity").get<std::string>()).eval(in, ctx);
  } catch (const Json::exception& e) {
    throw IoError(std::string("witness: ") + e.what());
  }
}

inline std::string witness_path(const std::string& out_path, const TrialRecord& rec) {
  return out_path + "." + rec.suite + "." + std::to_string(rec.trial_index) + "." +
         rec.quantity + ".witness.json";
}

// ---------------------------------------------------------------------------
// Suites

struct Probe {
  std::string_view quantity;
  WitnessInputs inputs;
};

struct TaskSpec {
  std::size_t index;
  Index dim;
  double r;  // NaN when the suite has no r
};

namespace detail {

inline std::vector<TaskSpec> expand_tasks(const ExperimentConfig& cfg) {
  std::vector<double> rs = effective_r_values(cfg);
  if (rs.empty()) rs.push_back(std::numeric_limits<double>::quiet_NaN());
  std::vector<TaskSpec> tasks;
  tasks.reserve(cfg.trials * cfg.dims.size() * rs.size());
  std::size_t idx = 0;
  for (Index d : cfg.dims)
    for (double r : rs)
      for (std::size_t t = 0; t < cfg.trials; ++t) tasks.push_back({idx++, d, r});
  return tasks;
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

// X and Y at relative spectral distance >= 0.05: independent draws on even
// trials, multiplicative perturbations Y = X^{1/2} exp(eps S) X^{1/2} on odd.
inline std::pair<PDMatrix, PDMatrix> separated_pair(const ExperimentConfig& cfg,
                                                    const TaskSpec& t, Rng& rng) {
  for (int attempt = 0; attempt < kMaxGenerationRetries; ++attempt) {
    const PDMatrix x = sample_pd(cfg.ensemble, t.dim, cfg.condition_cap, rng);
    PDMatrix y = x;
    if (t.index % 2 == 0) {
      y = sample_pd(cfg.ensemble, t.dim, cfg.condition_cap, rng);
    } else {
      std::uniform_real_distribution<double> eps(0.05, 0.3);
      const Matrix s = unit_symmetric(t.dim, rng);
      const EigenDecomp es = sym_eig(s);
      const double e = eps(rng);
      const Matrix expo = spectral_apply(es, [e](double v) { return std::exp(e * v); });
      const Matrix xh = x.power(0.5);
      y = PDMatrix(xh * expo * xh);
    }
    const double dist = op_norm(x.matrix() - y.matrix()) / std::max(x.norm(), y.norm());
    if (dist >= 0.05) return {x, y};
  }
  throw GenerationFailure("separated_pair: could not reach distance 0.05");
}

// A = B C^{-1} B + S + delta I with S PSD and rank-deficient. Trials cycle
// through delta = +1e-8, -1e-8 (boundary) and a generic delta of either sign.
inline WitnessInputs block_triple(Index n, std::size_t index, Rng& rng) {
  const Matrix qc = haar_orthogonal(n, rng);
  const PDMatrix c = PDMatrix::from_spectrum(qc, log_uniform_spectrum(n, 4.0, rng));
  const Matrix qb = haar_orthogonal(n, rng);
  std::uniform_real_distribution<double> mag(0.3, 1.5);
  std::bernoulli_distribution sign(0.5);
  Vector bd(n);
  for (Index i = 0; i < n; ++i) bd(i) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  const Matrix b = symmetrize(qb * bd.asDiagonal() * qb.transpose());
  const Matrix bcb = symmetrize(b * c.apply([](double v) { return 1.0 / v; }) * b);

  std::uniform_int_distribution<Index> rank_dist(0, n - 1);
  const Index k = rank_dist(rng);
  Matrix s = Matrix::Zero(n, n);
  if (k > 0) {
    const Matrix g = gaussian_matrix(n, k, rng);
    s = g * g.transpose();
    s /= std::max(1.0, lambda_max(s));
  }
  double delta = 0.0;
  switch (index % 3) {
    case 0: delta = 1e-8; break;
    case 1: delta = -1e-8; break;
    default: {
      std::uniform_real_distribution<double> u(-0.5, 0.5);
      delta = u(rng) * lambda_min(bcb);
    }
  }
  WitnessInputs in;
  in.mats["A"] = symmetrize(bcb + s + delta * Matrix::Identity(n, n));
  in.mats["B"] = b;
  in.mats["C"] = c.matrix();
  return in;
}

inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(k) /
                                       static_cast<double>(points - 1));
  }
  return g;
}

// Evaluates `quantity` at every value of `key` and keeps the worst one.
template <class Worse>
WitnessInputs worst_over(std::string_view quantity, WitnessInputs in, const std::string& key,
                         const std::vector<double>& values, const EvalContext& ctx,
                         Worse worse) {
  const Quantity& q = find_quantity(quantity);
  std::optional<double> best_v;
  double best_p = values.front();
  for (double p : values) {
    in.params[key] = p;
    const double v = q.eval(in, ctx);
    if (!best_v || worse(v, *best_v)) {
      best_v = v;
      best_p = p;
    }
  }
  in.params[key] = best_p;
  return in;
}

inline std::vector<Probe> sample_task(const ExperimentConfig& cfg, const EvalContext& ctx,
                                      const TaskSpec& t, Rng& rng) {
  const auto draw = [&] { return sample_pd(cfg.ensemble, t.dim, cfg.condition_cap, rng); };
  const auto larger = [](double a, double b) { return a > b; };
  std::vector<Probe> out;
  switch (cfg.suite) {
    case Suite::dual_form:
    case Suite::ag: {
      WitnessInputs in;
      in.mats["A"] = draw().matrix();
      in.mats["B"] = draw().matrix();
      in.params["r"] = t.r;
      out.push_back({cfg.suite == Suite::dual_form ? "dual_form_rel_dist" : "ag_gap", std::move(in)});
      break;
    }
    case Suite::axioms: {
      WitnessInputs in;
      in.mats["A"] = draw().matrix();
      in.mats["B"] = draw().matrix();
      in.params["r"] = t.r;
      out.push_back({"homogeneity",
                     worst_over("homogeneity", in, "t", {0.1, 0.5, 2.0, 10.0}, ctx, larger)});
      out.push_back({"inversion", in});
      out.push_back({"ag_gap", in});
      const auto [ca, cb] = sample_commuting_pair(t.dim, cfg.condition_cap, rng);
      WitnessInputs cin;
      cin.mats["A"] = ca.matrix();
      cin.mats["B"] = cb.matrix();
      cin.params["r"] = t.r;
      out.push_back({"commuting_value", std::move(cin)});
      break;
    }
    case Suite::certificates: {
      const PDMatrix a = draw(), b = draw();
      const MeanCandidate c(cfg.candidate, t.r);
      WitnessInputs in;
      in.mats["A"] = a.matrix();
      in.mats["B"] = b.matrix();
      in.params["r"] = t.r;
      for (const auto& v :
           default_certificate_vectors(certificate_operands(c, a, b), cfg.random_vectors, rng)) {
        in.vectors.push_back(v.vector());
      }
      out.push_back({"certificate_min", std::move(in)});
      break;
    }
    case Suite::quasiorder: {
      WitnessInputs in;
      in.mats["X"] = draw().matrix();
      in.mats["Y"] = draw().matrix();
      out.push_back({"method_agreement", in});
      out.push_back({"pencil_equivalence_mismatch", in});
      out.push_back({"basis_upper_bound", in});
      in.params["s"] = log_uniform(rng, 1e-3, 1e3);
      out.push_back({"scale_invariance", std::move(in)});

      // X = Y + G G^T with G of random rank: X >= Y in the Loewner order
      const PDMatrix y = draw();
      std::uniform_int_distribution<Index> rank_dist(1, t.dim);
      const Matrix g = gaussian_matrix(t.dim, rank_dist(rng), rng);
      const double scale = log_uniform(rng, 1e-3, 1.0) * y.norm();
      const Matrix psd = g * g.transpose();
      WitnessInputs lin;
      lin.mats["X"] = symmetrize(y.matrix() + scale * psd / std::max(lambda_max(psd), 1e-300));
      lin.mats["Y"] = y.matrix();
      out.push_back({"loewner_implies_quasi", std::move(lin)});

      out.push_back({"block_schur_mismatch", block_triple(t.dim, t.index, rng)});
      break;
    }
    case Suite::rigidity: {
      const auto [x, y] = separated_pair(cfg, t, rng);
      WitnessInputs in;
      in.mats["X"] = x.matrix();
      in.mats["Y"] = y.matrix();
      out.push_back({"rigidity_min_q", in});
      WitnessInputs self;
      self.mats["X"] = x.matrix();
      out.push_back({"self_q", std::move(self)});
      break;
    }
    case Suite::squaring: {
      // X rescaled so that q(X, Y) = 1 + u, with u = 0 on every fourth trial
      const PDMatrix y = draw(), x0 = draw();
      std::uniform_real_distribution<double> ud(0.0, 0.5);
      const double u = t.index % 4 == 0 ? 0.0 : ud(rng);
      const double q0 = q_scan(x0, y, ctx.qo());
      WitnessInputs in;
      in.mats["X"] = x0.matrix() * ((1.0 + u) / q0);
      in.mats["Y"] = y.matrix();
      out.push_back({"squaring_q2", std::move(in)});
      break;
    }
    case Suite::proofcheck: {
      const PDMatrix z = draw();
      const auto t_grid = log_grid(0.1 / std::sqrt(z.norm()),
                                   10.0 / std::sqrt(z.min_eigenvalue()), 32);
      WitnessInputs zin;
      zin.mats["Z"] = z.matrix();
      out.push_back({"difference_residual",
                     worst_over("difference_residual", zin, "t", t_grid, ctx, larger)});
      out.push_back({"sandwich_sqrt", worst_over("sandwich_sqrt", zin, "t", t_grid, ctx, larger)});
      WitnessInputs rin = zin;
      rin.params["r"] = t.r;
      out.push_back({"sandwich_r", worst_over("sandwich_r", rin, "t", t_grid, ctx, larger)});

      std::uniform_int_distribution<Index> rank_dist(1, t.dim - 1);
      const Projection p = sample_projection(t.dim, rank_dist(rng), rng);
      WitnessInputs sin;
      sin.mats["Y"] = draw().matrix();
      for (Index k = 0; k < p.rank(); ++k) sin.vectors.emplace_back(p.basis().col(k));
      out.push_back({"schur_residual", std::move(sin)});

      std::vector<double> ns;
      for (std::size_t n : quantities::partition_sizes()) ns.push_back(static_cast<double>(n));
      out.push_back({"partition_fineness_ratio",
                     worst_over("partition_fineness_ratio", zin, "n", ns, ctx, larger)});
      out.push_back(
          {"bounds_lhs_exact", worst_over("bounds_lhs_exact", zin, "n", ns, ctx, larger)});
      out.push_back({"final_rhs_step", zin});
      break;
    }
    case Suite::search_ag:
    case Suite::search_transitivity:
      break;
  }
  return out;
}

inline std::vector<TrialRecord> run_checks(const ExperimentConfig& cfg) {
  EvalContext ctx{cfg.candidate, cfg.tol};
  const std::string suite(to_string(cfg.suite));
  const auto tasks = expand_tasks(cfg);
  auto per_task = parallel_map(tasks.size(), cfg.workers, [&](std::size_t k) {
    const TaskSpec& t = tasks[k];
    const std::uint64_t seed = derive_seed(cfg.seed, suite, t.index);
    Rng rng(seed);
    std::vector<TrialRecord> recs;
    for (Probe& p : sample_task(cfg, ctx, t, rng)) {
      const Quantity& q = find_quantity(p.quantity);
      TrialRecord rec;
      rec.suite = suite;
      rec.trial_index = t.index;
      rec.seed = seed;
      rec.dim = static_cast<long>(t.dim);
      rec.r = t.r;
      rec.quantity = std::string(p.quantity);
      rec.value = q.eval(p.inputs, ctx);
      rec.pass = q.pass(rec.value, ctx);
      if (!rec.pass && !cfg.out_path.empty()) {
        rec.witness_ref = witness_path(cfg.out_path, rec);
        write_json_file(rec.witness_ref, witness_to_json(rec, p.inputs, ctx));
      }
      recs.push_back(std::move(rec));
    }
    return recs;
  });
  std::vector<TrialRecord> all;
  for (auto& v : per_task) {
    for (auto& r : v) all.push_back(std::move(r));
  }
  return all;
}

}  // namespace detail

struct SuiteResult {
  std::vector<TrialRecord> records;
  ReportSummary summary;
  /// Search outcome details (searches only).
  Json details = Json::object();

  int exit_code() const { return summary.all_passed() ? 0 : 1; }
};

inline Json transitivity_to_json(const TransitivityOutcome& o, const TransitivityConfig& cfg) {
  Json hist = Json::array();
  for (const auto& b : o.histogram) hist.push_back({{"bin", b.label}, {"count", b.count}});
  Json j{{"kind", "transitivity_search"},
         {"trials_requested", cfg.trials},
         {"trials_run", o.trials_run},
         {"margin", cfg.margin},
         {"min_q_xw", std::isfinite(o.min_q_xw) ? Json(o.min_q_xw) : Json(nullptr)},
         {"rejected_on_reverify", o.rejected_on_reverify},
         {"q_margin_histogram", std::move(hist)},
         {"found", o.witness.has_value()}};
  if (o.witness) {
    const auto& w = *o.witness;
    j["witness"] = {{"trial", w.trial},
                    {"X", matrix_to_json(w.x)},
                    {"Y", matrix_to_json(w.y)},
                    {"W", matrix_to_json(w.w)},
                    {"q_xy", w.q_xy},
                    {"q_yw", w.q_yw},
                    {"q_xw", w.q_xw},
                    {"reverify_grid_factor", 10}};
  }
  return j;
}

inline TransitivityConfig transitivity_config(const ExperimentConfig& cfg) {
  TransitivityConfig t;
  t.dims = cfg.dims;
  t.trials = cfg.trials;
  t.seed = cfg.seed;
  t.margin = cfg.margin;
  t.ensemble = cfg.ensemble;
  t.condition_cap = cfg.condition_cap;
  t.workers = cfg.workers;
  t.q_options.qo_tol = cfg.tol.qo;
  return t;
}

inline SearchAgConfig search_ag_config(const ExperimentConfig& cfg) {
  SearchAgConfig s;
  s.dims = cfg.dims;
  s.trials = cfg.trials;
  s.seed = cfg.seed;
  s.ensemble = cfg.ensemble;
  s.condition_cap = cfg.condition_cap;
  s.workers = cfg.workers;
  return s;
}

/// Runs the configured suite, writes JSONL (and CSV) when paths are set, and
/// returns the records with a summary. Searches never produce failing records.
inline SuiteResult run_suite(const ExperimentConfig& cfg) {
  validate(cfg);
  SuiteResult res;
  const std::string suite(to_string(cfg.suite));
  if (cfg.suite == Suite::search_ag) {
    Json runs = Json::array();
    const auto rs = effective_r_values(cfg);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const MeanCandidate c(cfg.candidate, rs[i]);
      const SearchAgOutcome o = search_ag_violation(c, search_ag_config(cfg));
      TrialRecord rec{suite, i, cfg.seed, static_cast<long>(cfg.dims.front()), rs[i],
                      "search_ag_best_gap", o.best_normalized_gap, true, {}};
      Json run{{"candidate", c.name()},           {"r", c.r()},
               {"trials_run", o.trials_run},      {"budget_exhausted", o.budget_exhausted},
               {"best_normalized_gap", o.best_normalized_gap},
               {"rejected_on_reverify", o.rejected_on_reverify}};
      if (o.witness) {
        rec.dim = static_cast<long>(o.witness->a.rows());
        if (!cfg.out_path.empty()) {
          rec.witness_ref = cfg.out_path + ".search_ag." + std::to_string(i) + ".witness.json";
          write_json_file(rec.witness_ref, ag_witness_to_json(c, *o.witness));
        }
        run["witness_trial"] = o.witness->trial;
        run["witness_gap"] = o.witness->normalized_gap;
      }
      runs.push_back(std::move(run));
      res.records.push_back(std::move(rec));
    }
    res.details = Json{{"kind", "search_ag"}, {"runs", std::move(runs)}};
  } else if (cfg.suite == Suite::search_transitivity) {
    const TransitivityConfig tc = transitivity_config(cfg);
    const TransitivityOutcome o = transitivity_search(tc);
    res.details = transitivity_to_json(o, tc);
    if (o.trials_run > 0) {
      TrialRecord rec{suite, 0, cfg.seed, static_cast<long>(cfg.dims.front()),
                      std::numeric_limits<double>::quiet_NaN(), "transitivity_min_q_xw",
                      o.min_q_xw, true, {}};
      if (o.witness) rec.dim = static_cast<long>(o.witness->x.rows());
      if (!cfg.out_path.empty()) {
        rec.witness_ref = cfg.out_path + ".transitivity.json";
        write_json_file(rec.witness_ref, res.details);
      }
      res.records.push_back(std::move(rec));
    }
  } else {
    res.records = detail::run_checks(cfg);
  }
  res.summary = emit_report(res.records, cfg.out_path, cfg.csv_path);
  return res;
}

}  // namespace ncag
