// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ncag/harness.hpp"

using namespace ncag;

namespace {

// Tolerances pinned for the acceptance run.
constexpr double kDualFormTol = 1e-9;
constexpr double kCertTol = 1e-8;
constexpr double kAgreementTol = 1e-6;
constexpr double kSelfTol = 1e-10;
constexpr double kProofResidualTol = 1e-10;
constexpr double kSearchThreshold = 1e-6;
constexpr double kTransitivityMargin = 1e-4;
constexpr std::uint64_t kSeed = 20260101;

unsigned g_workers = 1;

struct Stats {
  std::size_t n = 0, failed = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
};

Stats stats(const std::vector<TrialRecord>& recs, const std::set<std::string>& quantities) {
  Stats s;
  for (const auto& r : recs) {
    if (!quantities.count(r.quantity)) continue;
    ++s.n;
    if (!r.pass) ++s.failed;
    s.lo = std::min(s.lo, r.value);
    s.hi = std::max(s.hi, r.value);
  }
  return s;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

ExperimentConfig config(Suite s, std::vector<Index> dims, std::size_t trials) {
  ExperimentConfig c;
  c.suite = s;
  c.dims = std::move(dims);
  c.trials = trials;
  c.seed = kSeed;
  c.workers = g_workers;
  return c;
}

const std::vector<Index> kDims2to6{2, 3, 4, 5, 6};

struct Verdict {
  bool pass;
  std::string detail;
};

Verdict dual_form() {
  const auto r = run_suite(config(Suite::dual_form, {2, 3, 4, 5, 6, 7, 8, 9, 10}, 1000));
  const Stats s = stats(r.records, {"dual_form_rel_dist"});
  return {s.n == 1000u * 9u * 7u && s.hi <= kDualFormTol,
          "trials=" + std::to_string(s.n) + " max_rel_dist=" + fmt(s.hi)};
}

Verdict axioms() {
  const auto r = run_suite(config(Suite::axioms, kDims2to6, 667));
  std::string d;
  bool ok = true;
  for (const char* q : {"homogeneity", "inversion", "commuting_value", "ag_gap"}) {
    const Stats s = stats(r.records, {q});
    ok = ok && s.n >= 10000 && s.failed == 0;
    d += std::string(q) + " n=" + std::to_string(s.n) + " failed=" + std::to_string(s.failed) + " ";
  }
  return {ok, d};
}

Verdict certificates() {
  ExperimentConfig c = config(Suite::certificates, kDims2to6, 200);
  const auto r = run_suite(c);
  Stats below, above;
  for (const auto& rec : r.records) {
    Stats& s = rec.r <= 2.0 ? below : above;
    ++s.n;
    s.lo = std::min(s.lo, rec.value);
  }
  const bool ok = below.n >= 1000 && above.n >= 1000 && below.lo >= 1.0 - kCertTol &&
                  above.lo >= 1.0 - kCertTol;
  return {ok, "r<=2: n=" + std::to_string(below.n) + " min=" + fmt(below.lo) +
                  " r>=2: n=" + std::to_string(above.n) + " min=" + fmt(above.lo)};
}

Verdict method_agreement(const std::vector<TrialRecord>& recs) {
  const Stats s = stats(recs, {"method_agreement"});
  return {s.n >= 500 && s.hi <= kAgreementTol,
          "pairs=" + std::to_string(s.n) + " max|dq|=" + fmt(s.hi)};
}

Verdict rigidity() {
  const auto r = run_suite(config(Suite::rigidity, kDims2to6, 2000));
  const Stats m = stats(r.records, {"rigidity_min_q"});
  const Stats self = stats(r.records, {"self_q"});
  const bool ok = m.n >= 10000 && m.hi < 1.0 && self.hi <= kSelfTol && self.failed == 0;
  return {ok, "pairs=" + std::to_string(m.n) + " max_min_q=" + fmt(m.hi) +
                  " max|q(X,X)-1|=" + fmt(self.hi)};
}

Verdict order_properties(const std::vector<TrialRecord>& qo) {
  const Stats l = stats(qo, {"loewner_implies_quasi"});
  const Stats b = stats(qo, {"block_schur_mismatch"});
  const auto sq = run_suite(config(Suite::squaring, kDims2to6, 2000));
  const Stats s = stats(sq.records, {"squaring_q2"});
  const bool ok = l.n >= 10000 && b.n >= 10000 && s.n >= 10000 && l.failed == 0 &&
                  b.failed == 0 && s.failed == 0;
  return {ok, "loewner n=" + std::to_string(l.n) + " failed=" + std::to_string(l.failed) +
                  " squaring n=" + std::to_string(s.n) + " failed=" + std::to_string(s.failed) +
                  " block n=" + std::to_string(b.n) + " failed=" + std::to_string(b.failed)};
}

Verdict proofcheck() {
  const auto r = run_suite(config(Suite::proofcheck, kDims2to6, 67));
  const Stats res = stats(r.records, {"difference_residual", "schur_residual"});
  const Stats fine = stats(r.records, {"partition_fineness_ratio"});
  const Stats lhs = stats(r.records, {"bounds_lhs_exact"});
  const Stats step = stats(r.records, {"final_rhs_step"});
  const Stats sand = stats(r.records, {"sandwich_sqrt", "sandwich_r"});
  const bool ok = res.n >= 2000 && res.hi <= kProofResidualTol && fine.hi <= 1.0 + 1e-12 &&
                  lhs.hi <= kProofResidualTol && step.hi < 0.0 && sand.failed == 0 &&
                  r.summary.all_passed();
  return {ok, "samples=" + std::to_string(step.n) + " max_residual=" + fmt(res.hi) +
                  " max_fineness_ratio=" + fmt(fine.hi) + " max_lhs=" + fmt(lhs.hi) +
                  " max_rhs_step=" + fmt(step.hi) + " sandwich_failed=" +
                  std::to_string(sand.failed)};
}

Verdict search_ag() {
  SearchAgConfig cfg;
  cfg.dims = {2, 3};
  cfg.trials = 100000;
  cfg.seed = kSeed;
  cfg.threshold = kSearchThreshold;
  cfg.workers = g_workers;
  const MeanCandidate three(MeanTag::naive_power, 3.0), two(MeanTag::naive_power, 2.0);
  const SearchAgOutcome a = search_ag_violation(three, cfg);
  const SearchAgOutcome b = search_ag_violation(two, cfg);
  const bool reverified = a.witness && reverify_ag_witness(three, *a.witness, kSearchThreshold);
  const bool ok = reverified && !b.witness && b.budget_exhausted && b.trials_run == cfg.trials;
  std::string d = "r=3: ";
  d += a.witness ? "witness at trial " + std::to_string(a.witness->trial) + " gap=" +
                       fmt(a.witness->normalized_gap) + (reverified ? " reverified" : " NOT reverified")
                 : std::string("no witness");
  d += " r=2: trials=" + std::to_string(b.trials_run) +
       (b.budget_exhausted ? " exhausted" : " not exhausted") + " best_gap=" +
       fmt(b.best_normalized_gap);
  return {ok, d};
}

Verdict determinism() {
  std::string bad;
  for (Suite s : {Suite::dual_form, Suite::axioms, Suite::certificates, Suite::quasiorder,
                  Suite::rigidity, Suite::squaring, Suite::proofcheck}) {
    ExperimentConfig c = config(s, {2, 3, 4}, 10);
    c.workers = 1;
    const auto first = run_suite(c).records;
    const std::string a = render_jsonl(first);
    const std::string b = render_jsonl(run_suite(c).records);
    c.workers = 4;
    const std::string w = render_jsonl(sorted_records(run_suite(c).records));
    if (a.empty() || a != b || render_jsonl(sorted_records(first)) != w) {
      bad += std::string(to_string(s)) + " ";
    }
  }
  ExperimentConfig t = config(Suite::search_transitivity, {2}, 500);
  t.workers = 1;
  const std::string ta = run_suite(t).details.dump();
  t.workers = 4;
  if (ta != run_suite(t).details.dump()) bad += "search_transitivity ";
  return {bad.empty(), bad.empty() ? "8 suites byte-identical across reruns and worker counts"
                                   : "mismatch in: " + bad};
}

Verdict transitivity() {
  ExperimentConfig c = config(Suite::search_transitivity, {2, 3}, 20000);
  c.margin = kTransitivityMargin;
  const TransitivityConfig tc = transitivity_config(c);
  const TransitivityOutcome o = transitivity_search(tc);
  const Json report = transitivity_to_json(o, tc);
  bool ok = report.contains("trials_run") && report.contains("q_margin_histogram");
  std::string d = "trials_run=" + std::to_string(o.trials_run);
  if (o.witness) {
    const bool rv = reverify_transitivity(*o.witness, kTransitivityMargin, tc.q_options);
    ok = ok && rv;
    d += " witness at trial " + std::to_string(o.witness->trial) + " q_xy=" +
         fmt(o.witness->q_xy) + " q_yw=" + fmt(o.witness->q_yw) + " q_xw=" +
         fmt(o.witness->q_xw) + (rv ? " reverified" : " NOT reverified");
  } else {
    d += " no witness, min_q_xw=" + fmt(o.min_q_xw);
  }
  return {ok, d};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria runner"};
  int workers = 1;
  app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);
  g_workers = workers == 0 ? std::max(1u, std::thread::hardware_concurrency())
                           : static_cast<unsigned>(workers);

  std::vector<TrialRecord> quasi;
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"dual-form identity", dual_form},
      {"mean axioms", axioms},
      {"state certificates", certificates},
      {"quasi-order method agreement",
       [&] {
         quasi = run_suite(config(Suite::quasiorder, kDims2to6, 2000)).records;
         return method_agreement(quasi);
       }},
      {"rigidity", rigidity},
      {"order properties", [&] { return order_properties(quasi); }},
      {"proof machinery", proofcheck},
      {"ag violation search", search_ag},
      {"determinism", determinism},
      {"transitivity campaign", transitivity},
  };

  int failed = 0;
  int k = 0;
  for (const auto& [name, fn] : criteria) {
    ++k;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failed;
    std::printf("[%s] %2d %-30s %s (%.1fs)\n", v.pass ? "PASS" : "FAIL", k, name.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
