#include <gtest/gtest.h>

#include <cmath>

#include "ncag/means.hpp"
#include "ncag/random.hpp"

using namespace ncag;

namespace {

constexpr MeanTag kAllTags[] = {MeanTag::r_mean, MeanTag::r_mean_dual, MeanTag::naive_power,
                                MeanTag::exotic, MeanTag::conjugated};

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

AxiomCampaign plan(std::size_t trials, std::uint64_t seed, double cap = 100.0) {
  AxiomCampaign p;
  p.trials = trials;
  p.dims = {2, 3, 4, 5};
  p.seed = seed;
  p.condition_cap = cap;
  return p;
}

}  // namespace

TEST(MeanCandidateTest, RejectsDegenerateR) {
  EXPECT_THROW(MeanCandidate(MeanTag::r_mean, 1.0), InvalidR);
  EXPECT_THROW(MeanCandidate(MeanTag::r_mean, 0.0), InvalidR);
  EXPECT_THROW(MeanCandidate(MeanTag::r_mean, -2.0), InvalidR);
  EXPECT_THROW(MeanCandidate(MeanTag::r_mean, std::nan("")), InvalidR);
  EXPECT_NO_THROW(MeanCandidate(MeanTag::exotic, 0.5));
}

TEST(MeanCandidateTest, TagStringsRoundTrip) {
  for (MeanTag t : kAllTags) EXPECT_EQ(parse_mean_tag(to_string(t)), t);
  EXPECT_FALSE(parse_mean_tag("geometric").has_value());
}

TEST(RMean, Examples) {
  const PDMatrix a = PDMatrix::diagonal({4, 9});
  EXPECT_LE((r_mean(a, PDMatrix::identity(2), 0.5).matrix() - Matrix(PDMatrix::diagonal({2, 3}).matrix())).norm(),
            1e-14);
  const PDMatrix x(m2(2, 1, 1, 1));
  EXPECT_LE(rel_frobenius(r_mean(x, x, 2.7).matrix(), x.matrix()), 1e-13);
  const Matrix expected = m2(4.25, 2.25, 2.25, 1.25);
  EXPECT_LE((r_mean(x, PDMatrix::diagonal({1, 4}), 2).matrix() - expected).norm(), 1e-13);
  EXPECT_LE((r_mean_dual(x, PDMatrix::diagonal({1, 4}), 2).matrix() - expected).norm(), 1e-13);
  EXPECT_LE((r_mean_dual(a, PDMatrix::identity(2), 0.5).matrix() - PDMatrix::diagonal({2, 3}).matrix()).norm(),
            1e-14);
  EXPECT_LE(rel_frobenius(r_mean_dual(x, x, 0.3).matrix(), x.matrix()), 1e-13);
  EXPECT_THROW(r_mean(a, PDMatrix::identity(3), 0.5), DimMismatch);
}

TEST(RMean, CommutingDiagonalValue) {
  const MeanCandidate c(MeanTag::r_mean, 0.5);
  const Matrix m = eval_candidate(c, PDMatrix::diagonal({4, 9}), PDMatrix::diagonal({1, 16})).matrix();
  EXPECT_LE((m - PDMatrix::diagonal({2, 12}).matrix()).norm(), 1e-13);
}

TEST(RMean, SquareIsABInverseA) {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const PDMatrix a = sample_pd(EnsembleKind::wishart, 2 + k % 7, 100.0, rng);
    const PDMatrix b = sample_pd(EnsembleKind::wishart, a.dim(), 100.0, rng);
    const Matrix oracle = a.matrix() * b.matrix().ldlt().solve(a.matrix());
    EXPECT_LE(rel_frobenius(r_mean(a, b, 2.0).matrix(), oracle), 1e-10);
  }
}

TEST(RMean, IdentitySecondArgumentGivesPower) {
  Rng rng(22);
  for (double r : {0.3, 0.5, 1.5, 2.7}) {
    const PDMatrix a = sample_pd(EnsembleKind::exp_gaussian, 4, 100.0, rng);
    EXPECT_LE(rel_frobenius(r_mean(a, PDMatrix::identity(4), r).matrix(), a.power(r)), 1e-10);
  }
}

TEST(RMean, DualFormAgreement) {
  Rng rng(23);
  for (int k = 0; k < 300; ++k) {
    const PDMatrix a = sample_pd(EnsembleKind::wishart, 2 + k % 9, 100.0, rng);
    const PDMatrix b = sample_pd(EnsembleKind::exp_gaussian, a.dim(), 100.0, rng);
    for (double r : {0.3, 0.5, 0.9, 1.5, 2.0, 2.7, 3.0}) {
      EXPECT_LE(rel_frobenius(r_mean_dual(a, b, r).matrix(), r_mean(a, b, r).matrix()), 1e-9);
    }
  }
}

TEST(EvalCandidate, Examples) {
  const MeanCandidate naive(MeanTag::naive_power, 2);
  EXPECT_LE((eval_candidate(naive, PDMatrix::diagonal({4, 9}), PDMatrix::identity(2)).matrix() -
             PDMatrix::diagonal({16, 81}).matrix())
                .norm(),
            1e-12);
  for (double r : {0.5, 2.0, 3.0}) {
    const Matrix id = Matrix::Identity(3, 3);
    EXPECT_LE((eval_candidate(MeanCandidate(MeanTag::exotic, r), PDMatrix::identity(3),
                              PDMatrix::identity(3)).matrix() - id).norm(), 1e-13);
    EXPECT_LE((eval_candidate(MeanCandidate(MeanTag::conjugated, r), PDMatrix::identity(3),
                              PDMatrix::identity(3)).matrix() - id).norm(), 1e-13);
  }
}

TEST(EvalCandidate, AllCandidatesSymmetricPositive) {
  Rng rng(24);
  for (MeanTag t : kAllTags) {
    // the exotic form raises B to the 12th power; keep it well conditioned
    const double cap = t == MeanTag::exotic ? 2.0 : 50.0;
    for (int k = 0; k < 50; ++k) {
      const PDMatrix a = sample_pd(EnsembleKind::wishart, 2 + k % 4, cap, rng);
      const PDMatrix b = sample_pd(EnsembleKind::wishart, a.dim(), cap, rng);
      for (double r : {0.5, 2.0, 3.0}) {
        const PDMatrix m = eval_candidate(MeanCandidate(t, r), a, b);
        EXPECT_GT(m.min_eigenvalue(), 0.0);
        EXPECT_EQ(m.matrix(), m.matrix().transpose());
      }
    }
  }
}

TEST(Homogeneity, HoldsForRMeanNaiveAndExotic) {
  for (double r : {0.5, 2.0, 3.0}) {
    EXPECT_TRUE(check_homogeneity(MeanCandidate(MeanTag::r_mean, r), plan(200, 1)).passed());
    EXPECT_TRUE(check_homogeneity(MeanCandidate(MeanTag::naive_power, r), plan(200, 2)).passed());
    EXPECT_TRUE(check_homogeneity(MeanCandidate(MeanTag::exotic, r), plan(200, 3, 2.0)).passed());
  }
}

TEST(Homogeneity, ConjugatedFailsOnNonCommutingPair) {
  // With commuting inputs every factor commutes and the formula collapses to
  // A^r B^{1-r}, which is homogeneous; the failure needs a non-commuting B.
  const MeanCandidate c(MeanTag::conjugated, 2.0);
  const PDMatrix a = PDMatrix::diagonal({1, 2});
  EXPECT_LE(homogeneity_violation(c, a, PDMatrix::identity(2), 2.0), 1e-12);
  EXPECT_GT(homogeneity_violation(c, a, PDMatrix(m2(2, 1, 1, 2)), 2.0), 0.1);

  const AxiomReport rep = check_homogeneity(c, plan(50, 4));
  EXPECT_FALSE(rep.passed());
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_GT(rep.witness->violation, kAxiomWitnessTol);
  // the witness reproduces its own violation
  EXPECT_DOUBLE_EQ(homogeneity_violation(c, PDMatrix(rep.witness->a), PDMatrix(rep.witness->b),
                                         rep.witness->t),
                   rep.witness->violation);
}

TEST(Inversion, HoldsForRMeanNaiveAndExotic) {
  for (double r : {0.5, 2.0, 3.0}) {
    EXPECT_TRUE(check_inversion(MeanCandidate(MeanTag::r_mean, r), plan(200, 5)).passed());
    EXPECT_TRUE(check_inversion(MeanCandidate(MeanTag::naive_power, r), plan(200, 6)).passed());
    EXPECT_TRUE(check_inversion(MeanCandidate(MeanTag::exotic, r), plan(200, 7, 2.0)).passed());
  }
}

TEST(Inversion, NaivePowerAgainstExplicitInverse) {
  Rng rng(25);
  for (int k = 0; k < 50; ++k) {
    const PDMatrix a = sample_pd(EnsembleKind::wishart, 3, 30.0, rng);
    const PDMatrix b = sample_pd(EnsembleKind::wishart, 3, 30.0, rng);
    const double r = 2.5;
    const Matrix inv = a.power(-r / 2) * b.power(r - 1) * a.power(-r / 2);
    const Matrix m = eval_candidate(MeanCandidate(MeanTag::naive_power, r), a, b).matrix();
    EXPECT_LE((m * inv - Matrix::Identity(3, 3)).norm(), 1e-9);
  }
}

TEST(Inversion, ConjugatedIsReportedNotAsserted) {
  const AxiomReport rep = check_inversion(MeanCandidate(MeanTag::conjugated, 2.0), plan(50, 8));
  EXPECT_EQ(rep.trials, 50u);
  EXPECT_GE(rep.max_violation, 0.0);
  EXPECT_EQ(rep.witness.has_value(), rep.max_violation > kAxiomTol);
  RecordProperty("conjugated_inversion_max_violation", std::to_string(rep.max_violation));
}

TEST(CommutingValue, HoldsForRMeanAndNaive) {
  for (double r : {0.5, 2.0, 3.0}) {
    EXPECT_TRUE(check_commuting_value(MeanCandidate(MeanTag::r_mean, r), plan(200, 9)).passed());
    EXPECT_TRUE(check_commuting_value(MeanCandidate(MeanTag::naive_power, r), plan(200, 10)).passed());
  }
}

TEST(CommutingValue, ExoticGivesWrongPowerOfB) {
  // on commuting inputs the exotic form is A^r B^{1-4r}
  const MeanCandidate c(MeanTag::exotic, 0.5);
  const PDMatrix a = PDMatrix::diagonal({4, 9}), b = PDMatrix::diagonal({2, 3});
  const Matrix m = eval_candidate(c, a, b).matrix();
  EXPECT_NEAR(m(0, 0), 2.0 * std::pow(2.0, -1.0), 1e-12);
  EXPECT_NEAR(m(1, 1), 3.0 * std::pow(3.0, -1.0), 1e-12);
  EXPECT_FALSE(check_commuting_value(c, plan(20, 11, 2.0)).passed());
}

TEST(Campaign, DeterministicAndWorkerInvariant) {
  const MeanCandidate c(MeanTag::conjugated, 3.0);
  AxiomCampaign p = plan(40, 12);
  const AxiomReport a = check_homogeneity(c, p);
  p.workers = 3;
  const AxiomReport b = check_homogeneity(c, p);
  EXPECT_EQ(a.max_violation, b.max_violation);
  ASSERT_TRUE(a.witness && b.witness);
  EXPECT_EQ(a.witness->trial, b.witness->trial);
  EXPECT_EQ(a.witness->a, b.witness->a);
}

TEST(Campaign, WitnessIsFirstLargeViolation) {
  const AxiomReport rep = check_homogeneity(MeanCandidate(MeanTag::conjugated, 2.0), plan(30, 13));
  ASSERT_TRUE(rep.witness.has_value());
  // recompute each earlier trial: none may exceed the witness threshold
  for (std::size_t i = 0; i < rep.witness->trial; ++i) {
    Rng rng(derive_seed(13, "homogeneity", i));
    const Index dim = std::vector<Index>{2, 3, 4, 5}[i % 4];
    const PDMatrix a = sample_pd(EnsembleKind::wishart, dim, 100.0, rng);
    const PDMatrix b = sample_pd(EnsembleKind::wishart, dim, 100.0, rng);
    for (double t : {0.1, 0.5, 2.0, 10.0}) {
      EXPECT_LE(homogeneity_violation(MeanCandidate(MeanTag::conjugated, 2.0), a, b, t),
                kAxiomWitnessTol);
    }
  }
}

TEST(Campaign, RejectsBadPlans) {
  AxiomCampaign p = plan(5, 14);
  p.t_grid = {1.0, -1.0};
  EXPECT_THROW(check_homogeneity(MeanCandidate(MeanTag::r_mean, 2.0), p), ConfigError);
  p = plan(5, 14);
  p.dims.clear();
  EXPECT_THROW(check_inversion(MeanCandidate(MeanTag::r_mean, 2.0), p), ConfigError);
}

TEST(Campaign, EvaluationErrorsCarryTheSample) {
  const AxiomWitness w{Matrix::Identity(2, 2), Matrix::Identity(2, 2), 3.0, 17, 0.0};
  try {
    detail::with_sample(w, []() -> double { throw NonPositiveSpectrum("boom"); });
    FAIL() << "expected SampleError";
  } catch (const SampleError& e) {
    EXPECT_EQ(e.sample().trial, 17u);
    EXPECT_EQ(e.sample().t, 3.0);
  }
}
