#pragma once

// Counterexample search for the AG bound: any rival of the r-mean that keeps
// homogeneity and inversion must break M(A,B) >= rA + (1-r)B (r > 1, reversed
// for 0 < r < 1) somewhere.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncag/inequalities.hpp"
#include "ncag/json_io.hpp"
#include "ncag/means.hpp"
#include "ncag/parallel.hpp"
#include "ncag/random.hpp"

namespace ncag {

struct SearchAgConfig {
  std::vector<Index> dims{2, 3};
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  EnsembleKind ensemble = EnsembleKind::wishart;
  double condition_cap = 100.0;
  /// A witness needs ag_gap < -threshold * scale.
  double threshold = 1e-6;
  unsigned workers = 1;
  std::size_t chunk = 2048;
};

struct AgWitness {
  std::size_t trial = 0;
  Matrix a;
  Matrix b;
  double normalized_gap = 0.0;
};

struct SearchAgOutcome {
  std::optional<AgWitness> witness;
  std::size_t trials_run = 0;
  double best_normalized_gap = std::numeric_limits<double>::infinity();
  bool budget_exhausted = false;
  std::size_t rejected_on_reverify = 0;
};

inline Json ag_witness_to_json(const MeanCandidate& c, const AgWitness& w) {
  return Json{{"kind", "ag_violation"},
              {"candidate", c.name()},
              {"r", c.r()},
              {"trial", w.trial},
              {"normalized_gap", w.normalized_gap},
              {"A", matrix_to_json(w.a)},
              {"B", matrix_to_json(w.b)}};
}

/// Reloads a serialized witness and recomputes its normalized gap.
inline double recompute_ag_witness(const Json& j) {
  const auto tag = parse_mean_tag(j.at("candidate").get<std::string>());
  if (!tag) throw IoError("ag witness: unknown candidate");
  const MeanCandidate c(*tag, j.at("r").get<double>());
  return ag_gap(c, pd_from_json(j.at("A")), pd_from_json(j.at("B"))).normalized();
}

/// Re-verification after a JSON round trip: the recomputed gap must still
/// exceed the threshold and agree with the original to threshold / 10.
inline bool reverify_ag_witness(const MeanCandidate& c, const AgWitness& w, double threshold) {
  const Json j = Json::parse(ag_witness_to_json(c, w).dump());
  const double again = recompute_ag_witness(j);
  return again < -threshold && std::abs(again - w.normalized_gap) <= threshold / 10.0;
}

/// First sampled (A, B), ordered by trial index, violating the AG bound.
/// Returns with budget_exhausted set when no witness survives the budget.
inline SearchAgOutcome search_ag_violation(const MeanCandidate& c, const SearchAgConfig& cfg) {
  if (cfg.dims.empty()) throw ConfigError("search_ag_violation: empty dims");
  SearchAgOutcome out;
  for (std::size_t start = 0; start < cfg.trials && !out.witness; start += cfg.chunk) {
    const std::size_t count = std::min(cfg.chunk, cfg.trials - start);
    auto found = parallel_map(count, cfg.workers, [&](std::size_t k) {
      const std::size_t i = start + k;
      Rng rng(derive_seed(cfg.seed, "search_ag", i));
      const Index dim = cfg.dims[i % cfg.dims.size()];
      const PDMatrix a = sample_pd(cfg.ensemble, dim, cfg.condition_cap, rng);
      const PDMatrix b = sample_pd(cfg.ensemble, dim, cfg.condition_cap, rng);
      return AgWitness{i, a.matrix(), b.matrix(), ag_gap(c, a, b).normalized()};
    });
    for (auto& w : found) {
      ++out.trials_run;
      out.best_normalized_gap = std::min(out.best_normalized_gap, w.normalized_gap);
      if (!(w.normalized_gap < -cfg.threshold)) continue;
      if (reverify_ag_witness(c, w, cfg.threshold)) {
        out.witness = std::move(w);
        break;
      }
      ++out.rejected_on_reverify;
    }
  }
  out.budget_exhausted = !out.witness.has_value();
  return out;
}

}  // namespace ncag
