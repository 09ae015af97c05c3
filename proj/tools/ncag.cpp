// ncag: seeded verification suites and counterexample searches.
//
//   ncag verify --suite rigidity --dims 2,3,4 --trials 1000 --seed 7 --out rig.jsonl
//   ncag search ag --candidate naive_power --r 3 --dims 2,3 --trials 100000
//   ncag search transitivity --dims 2 --trials 1000000 --margin 1e-4
//
// Exit status: 0 all checks pass, 1 an invariant failed, 2 bad configuration.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "ncag/harness.hpp"

namespace {

struct CliOptions {
  ncag::ExperimentConfig cfg;
  std::vector<long> dims{2, 3, 4};
  std::string ensemble = "wishart";
  std::string candidate = "r_mean";
  std::string suite = "dual_form";
};

void add_common(CLI::App& app, CliOptions& o, bool with_r) {
  app.add_option("--dims", o.dims, "Matrix dimensions (>= 2)")->delimiter(',');
  if (with_r) app.add_option("--r", o.cfg.r_values, "Exponents r (> 0, != 1)")->delimiter(',');
  app.add_option("--trials", o.cfg.trials, "Trials per (dim, r) or search budget");
  app.add_option("--seed", o.cfg.seed, "Base seed");
  app.add_option("--ensemble", o.ensemble,
                 "wishart | exp_gaussian | diagonal_dominant | commuting_pair | near_identity");
  app.add_option("--cap", o.cfg.condition_cap, "Condition number cap for sampled matrices");
  app.add_option("--workers", o.cfg.workers, "Worker threads (0 = hardware concurrency)");
  app.add_option("--out", o.cfg.out_path, "JSONL report path; witness files go alongside");
  app.add_option("--csv", o.cfg.csv_path, "Optional CSV report path");
  app.add_option("--tol-pd", o.cfg.tol.pd, "Positive-definiteness tolerance");
  app.add_option("--tol-order", o.cfg.tol.order, "Loewner-order tolerance");
  app.add_option("--tol-qo", o.cfg.tol.qo, "Quasi-order threshold slack");
}

ncag::ExperimentConfig finish(CliOptions& o) {
  auto& cfg = o.cfg;
  cfg.dims.assign(o.dims.begin(), o.dims.end());
  const auto ens = ncag::parse_ensemble(o.ensemble);
  if (!ens) throw ncag::ConfigError("unknown ensemble: " + o.ensemble);
  cfg.ensemble = *ens;
  const auto cand = ncag::parse_mean_tag(o.candidate);
  if (!cand) throw ncag::ConfigError("unknown candidate: " + o.candidate);
  cfg.candidate = *cand;
  return cfg;
}

int run(const ncag::ExperimentConfig& cfg) {
  const ncag::SuiteResult res = ncag::run_suite(cfg);
  std::cout << ncag::human_summary(res.records);
  if (!res.details.empty()) std::cout << res.details.dump(2) << "\n";
  for (const auto& p : res.summary.witness_paths) std::cout << "witness: " << p << "\n";
  return res.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Seeded numerical checks for r-means and the vector-state quasi-order"};
  app.require_subcommand(1);

  CliOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Run one verification suite");
  std::string suite_help = "Suite:";
  for (auto s : ncag::kAllSuites) suite_help += " " + std::string(ncag::to_string(s));
  verify->add_option("--suite", verify_opts.suite, suite_help)->required();
  verify->add_option("--candidate", verify_opts.candidate,
                     "r_mean | r_mean_dual | naive_power | exotic | conjugated");
  verify->add_option("--random-vectors", verify_opts.cfg.random_vectors,
                     "Random unit vectors per certificate");
  add_common(*verify, verify_opts, true);

  auto* search = app.add_subcommand("search", "Counterexample searches");
  search->require_subcommand(1);

  CliOptions ag_opts;
  ag_opts.cfg.suite = ncag::Suite::search_ag;
  ag_opts.candidate = "naive_power";
  ag_opts.dims = {2, 3};
  ag_opts.cfg.trials = 100000;
  auto* ag = search->add_subcommand("ag", "Search for a violation of the AG bound");
  ag->add_option("--candidate", ag_opts.candidate, "naive_power | exotic");
  add_common(*ag, ag_opts, true);

  CliOptions tr_opts;
  tr_opts.cfg.suite = ncag::Suite::search_transitivity;
  tr_opts.dims = {2};
  tr_opts.cfg.trials = 100000;
  auto* tr = search->add_subcommand("transitivity", "Search for a non-transitive triple");
  tr->add_option("--margin", tr_opts.cfg.margin, "Dominance margin");
  add_common(*tr, tr_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      const auto suite = ncag::parse_suite(verify_opts.suite);
      if (!suite) throw ncag::ConfigError("unknown suite: " + verify_opts.suite);
      verify_opts.cfg.suite = *suite;
      return run(finish(verify_opts));
    }
    if (ag->parsed()) return run(finish(ag_opts));
    return run(finish(tr_opts));
  } catch (const ncag::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ncag::InvalidR& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ncag::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
