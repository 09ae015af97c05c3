#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ncag/harness.hpp"

using namespace ncag;

namespace {

std::string tmp(const std::string& name) { return std::string(NCAG_TEST_TMP_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small(Suite s, std::size_t trials = 4) {
  ExperimentConfig c;
  c.suite = s;
  c.trials = trials;
  c.dims = {2, 3};
  c.seed = 7;
  return c;
}

}  // namespace

TEST(Config, SuiteNamesRoundTrip) {
  for (Suite s : kAllSuites) EXPECT_EQ(parse_suite(to_string(s)), s);
  EXPECT_FALSE(parse_suite("everything").has_value());
}

TEST(Config, ValidationRejectsBadCombinations) {
  ExperimentConfig c = small(Suite::certificates);
  c.r_values = {0.5};
  EXPECT_THROW(validate(c), ConfigError);
  c = small(Suite::proofcheck);
  c.r_values = {2.0};
  EXPECT_THROW(validate(c), ConfigError);
  c = small(Suite::ag);
  c.r_values = {1.0};
  EXPECT_THROW(validate(c), ConfigError);
  c = small(Suite::ag);
  c.dims = {1};
  EXPECT_THROW(validate(c), ConfigError);
  c = small(Suite::ag, 0);
  EXPECT_THROW(validate(c), ConfigError);
  c = small(Suite::search_ag);
  c.candidate = MeanTag::r_mean;
  EXPECT_THROW(validate(c), ConfigError);
  c = small(Suite::rigidity);
  c.tol.qo = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
  EXPECT_NO_THROW(validate(small(Suite::search_transitivity, 0)));
}

TEST(RunSuite, DualFormRecordCount) {
  ExperimentConfig c = small(Suite::dual_form, 10);
  c.dims = {2, 3, 4, 5, 6};
  const SuiteResult r = run_suite(c);
  EXPECT_EQ(r.records.size(), 10u * 5u * 7u);
  EXPECT_TRUE(r.summary.all_passed());
  EXPECT_EQ(r.exit_code(), 0);
}

TEST(RunSuite, EveryCheckSuitePassesForRMean) {
  for (Suite s : {Suite::axioms, Suite::ag, Suite::certificates, Suite::quasiorder,
                  Suite::rigidity, Suite::squaring, Suite::proofcheck}) {
    const SuiteResult r = run_suite(small(s));
    EXPECT_GT(r.records.size(), 0u) << to_string(s);
    EXPECT_TRUE(r.summary.all_passed()) << to_string(s) << "\n" << human_summary(r.records);
  }
}

TEST(RunSuite, NaivePowerAgFailsWithReproducibleWitness) {
  ExperimentConfig c = small(Suite::ag, 200);
  c.candidate = MeanTag::naive_power;
  c.r_values = {3.0};
  c.out_path = tmp("naive_ag.jsonl");
  const SuiteResult r = run_suite(c);
  EXPECT_EQ(r.exit_code(), 1);
  ASSERT_GT(r.summary.failed, 0u);
  EXPECT_EQ(r.summary.witness_paths.size(), r.summary.failed);
  for (const auto& rec : r.records) {
    if (rec.pass) continue;
    ASSERT_FALSE(rec.witness_ref.empty());
    const Json w = read_json_file(rec.witness_ref);
    EXPECT_EQ(w.at("quantity").get<std::string>(), "ag_gap");
    EXPECT_NEAR(recompute_witness(w), rec.value, 1e-12);
  }
  EXPECT_EQ(r.summary.line().rfind("failed ", 0), 0u);
}

TEST(RunSuite, ConjugatedAxiomsFailWithWitnesses) {
  ExperimentConfig c = small(Suite::axioms, 5);
  c.candidate = MeanTag::conjugated;
  c.r_values = {2.0};
  c.out_path = tmp("conj_axioms.jsonl");
  const SuiteResult r = run_suite(c);
  EXPECT_EQ(r.exit_code(), 1);
  for (const auto& rec : r.records) {
    if (rec.pass) continue;
    EXPECT_NEAR(recompute_witness(read_json_file(rec.witness_ref)), rec.value,
                1e-12 * std::max(1.0, std::abs(rec.value)));
  }
}

TEST(RunSuite, EveryQuantityRecomputesFromItsWitnessJson) {
  const EvalContext ctx{};
  for (Suite s : {Suite::dual_form, Suite::axioms, Suite::ag, Suite::certificates,
                  Suite::quasiorder, Suite::rigidity, Suite::squaring, Suite::proofcheck}) {
    ExperimentConfig c = small(s, 1);
    const auto rs = effective_r_values(c);
    const TaskSpec t{3, 3, rs.empty() ? std::nan("") : rs.front()};
    Rng rng(derive_seed(1, to_string(s), 3));
    for (const auto& p : detail::sample_task(c, ctx, t, rng)) {
      const Quantity& q = find_quantity(p.quantity);
      TrialRecord rec;
      rec.suite = std::string(to_string(s));
      rec.quantity = std::string(p.quantity);
      rec.value = q.eval(p.inputs, ctx);
      const Json j = Json::parse(witness_to_json(rec, p.inputs, ctx).dump());
      const double again = recompute_witness(j);
      if (std::isinf(rec.value)) {
        EXPECT_EQ(again, rec.value);
      } else {
        EXPECT_NEAR(again, rec.value, 1e-12 * std::max(1.0, std::abs(rec.value)))
            << to_string(s) << " " << p.quantity;
      }
    }
  }
}

TEST(RunSuite, RecomputeRejectsBrokenWitness) {
  EXPECT_THROW(recompute_witness(Json{{"quantity", "ag_gap"}}), IoError);
  Json j{{"quantity", "no_such_quantity"}, {"inputs", Json::object()}, {"params", Json::object()},
         {"vectors", Json::array()}, {"candidate", "r_mean"},
         {"tolerances", {{"pd", 1e-12}, {"order", 1e-10}, {"qo", 1e-8}}}};
  EXPECT_THROW(recompute_witness(j), ConfigError);
}

TEST(Determinism, ByteIdenticalJsonlAndWorkerInvariance) {
  for (Suite s : {Suite::quasiorder, Suite::proofcheck, Suite::axioms}) {
    ExperimentConfig c = small(s, 3);
    c.out_path = tmp("det_a.jsonl");
    run_suite(c);
    const std::string a = slurp(c.out_path);
    c.out_path = tmp("det_b.jsonl");
    run_suite(c);
    const std::string b = slurp(c.out_path);
    c.out_path = tmp("det_c.jsonl");
    c.workers = 3;
    run_suite(c);
    const std::string w = slurp(c.out_path);
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, b) << to_string(s);
    EXPECT_EQ(a, w) << to_string(s);
  }
}

TEST(Determinism, DifferentSeedsDiffer) {
  ExperimentConfig c = small(Suite::dual_form, 2);
  const auto a = render_jsonl(run_suite(c).records);
  c.seed = 8;
  EXPECT_NE(a, render_jsonl(run_suite(c).records));
}

TEST(Report, CsvWrittenAlongsideJsonl) {
  ExperimentConfig c = small(Suite::squaring, 2);
  c.out_path = tmp("sq.jsonl");
  c.csv_path = tmp("sq.csv");
  const SuiteResult r = run_suite(c);
  const std::string csv = slurp(c.csv_path);
  EXPECT_EQ(csv.rfind(csv_header(), 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')),
            r.records.size() + 1);
  std::istringstream lines(slurp(c.out_path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    const Json j = Json::parse(line);
    EXPECT_EQ(j.at("suite").get<std::string>(), "squaring");
    ++n;
  }
  EXPECT_EQ(n, r.records.size());
}

TEST(SearchAg, NaivePowerAtThreeFindsWitness) {
  SearchAgConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 3;
  const MeanCandidate c(MeanTag::naive_power, 3.0);
  const SearchAgOutcome o = search_ag_violation(c, cfg);
  ASSERT_TRUE(o.witness.has_value());
  EXPECT_FALSE(o.budget_exhausted);
  EXPECT_LT(o.witness->normalized_gap, -1e-6);
  EXPECT_EQ(o.trials_run, o.witness->trial + 1);
  EXPECT_TRUE(reverify_ag_witness(c, *o.witness, 1e-6));
  // independent recomputation from the stored matrices
  const double again = ag_gap(c, PDMatrix(o.witness->a), PDMatrix(o.witness->b)).normalized();
  EXPECT_EQ(again, o.witness->normalized_gap);
}

TEST(SearchAg, NaivePowerAtTwoExhausts) {
  SearchAgConfig cfg;
  cfg.trials = 3000;
  cfg.seed = 3;
  const SearchAgOutcome o = search_ag_violation(MeanCandidate(MeanTag::naive_power, 2.0), cfg);
  EXPECT_FALSE(o.witness.has_value());
  EXPECT_TRUE(o.budget_exhausted);
  EXPECT_EQ(o.trials_run, 3000u);
  EXPECT_GE(o.best_normalized_gap, -1e-8);
}

TEST(SearchAg, WorkerInvariant) {
  SearchAgConfig cfg;
  cfg.trials = 5000;
  cfg.chunk = 256;
  cfg.seed = 11;
  const MeanCandidate c(MeanTag::naive_power, 3.0);
  const SearchAgOutcome a = search_ag_violation(c, cfg);
  cfg.workers = 4;
  const SearchAgOutcome b = search_ag_violation(c, cfg);
  ASSERT_EQ(a.witness.has_value(), b.witness.has_value());
  if (a.witness) EXPECT_EQ(a.witness->trial, b.witness->trial);
  EXPECT_EQ(a.trials_run, b.trials_run);
}

TEST(SearchSuites, PersistOutcomeAndAlwaysPass) {
  ExperimentConfig c = small(Suite::search_ag, 20000);
  c.candidate = MeanTag::naive_power;
  c.r_values = {2.0, 3.0};
  c.out_path = tmp("search_ag.jsonl");
  const SuiteResult r = run_suite(c);
  EXPECT_EQ(r.exit_code(), 0);
  ASSERT_EQ(r.records.size(), 2u);
  const auto& runs = r.details.at("runs");
  EXPECT_TRUE(runs.at(0).at("budget_exhausted").get<bool>());
  EXPECT_FALSE(runs.at(1).at("budget_exhausted").get<bool>());
  ASSERT_FALSE(r.records[1].witness_ref.empty());
  const Json w = read_json_file(r.records[1].witness_ref);
  EXPECT_LT(recompute_ag_witness(w), -1e-6);

  ExperimentConfig t = small(Suite::search_transitivity, 0);
  t.out_path = tmp("trans_empty.jsonl");
  const SuiteResult e = run_suite(t);
  EXPECT_EQ(e.exit_code(), 0);
  EXPECT_TRUE(e.records.empty());
  EXPECT_EQ(e.details.at("trials_run").get<std::size_t>(), 0u);
  EXPECT_EQ(slurp(t.out_path), "");
}

TEST(SearchSuites, TransitivityReportIsDeterministic) {
  ExperimentConfig c = small(Suite::search_transitivity, 300);
  c.out_path = tmp("trans_a.jsonl");
  const SuiteResult a = run_suite(c);
  c.out_path = tmp("trans_b.jsonl");
  c.workers = 2;
  const SuiteResult b = run_suite(c);
  EXPECT_EQ(a.details.dump(), b.details.dump());
  EXPECT_EQ(slurp(tmp("trans_a.jsonl.transitivity.json")),
            slurp(tmp("trans_b.jsonl.transitivity.json")));
}
