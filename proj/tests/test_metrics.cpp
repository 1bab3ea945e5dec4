#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <wfi/metrics.hpp>
#include <wfi/stats.hpp>

namespace {

using wfi::FeatureLaw;
using wfi::StepEstimate;

StepEstimate constant_step(double v) { return {{-1.0}, {v}, 1}; }

TEST(Hellinger, IdenticalIsZero) {
  auto f = [](double x) { return 0.5 + 0.2 * x; };
  EXPECT_NEAR(wfi::hellinger(f, f, FeatureLaw::uniform()), 0.0, 1e-12);
}

TEST(Hellinger, DisjointMassIsOne) {
  auto f = [](double) { return 0.0; };
  auto g = [](double) { return 1.0; };
  EXPECT_NEAR(wfi::hellinger(f, g, FeatureLaw::uniform()), 1.0, 1e-10);
}

TEST(Hellinger, StepAgainstSmoothSplitsAtJumps) {
  const StepEstimate s{{-1.0, 0.0}, {0.25, 0.75}, 2};
  auto g = [](double) { return 0.5; };
  // each half: (sqrt(.75)-sqrt(.5))^2 + (sqrt(.25)-sqrt(.5))^2, times density 1/2
  const double a = std::sqrt(0.75) - std::sqrt(0.5);
  const double b = std::sqrt(0.25) - std::sqrt(0.5);
  const double expected = std::sqrt(0.5 * (a * a + b * b));
  EXPECT_NEAR(wfi::hellinger(s, g, FeatureLaw::uniform()), expected, 1e-9);
}

TEST(L1, ConstantMatchIsZero) {
  auto t = [](double) { return 0.3; };
  EXPECT_NEAR(wfi::l1_error_lebesgue(constant_step(0.3), t, -1.0, 1.0), 0.0, 1e-12);
}

TEST(L1, ZeroAgainstHalf) {
  auto t = [](double) { return 0.5; };
  EXPECT_NEAR(wfi::l1_error_lebesgue(constant_step(0.0), t, -1.0, 1.0), 1.0, 1e-10);
}

TEST(L1, ZeroAgainstAffine) {
  auto t = [](double x) { return (x + 1.0) / 4.0; };
  EXPECT_NEAR(wfi::l1_error_lebesgue(constant_step(0.0), t, -1.0, 1.0), 0.5, 1e-10);
}

TEST(L1, CrossingInsidePiece) {
  // |x| over [-1, 1] = 1
  auto t = [](double x) { return x; };
  EXPECT_NEAR(wfi::l1_error_lebesgue(constant_step(0.0), t, -1.0, 1.0), 1.0, 1e-10);
}

TEST(L1, FeatureLawWeighting) {
  auto t = [](double) { return 0.5; };
  EXPECT_NEAR(wfi::l1_error_feature_law(constant_step(0.0), t, FeatureLaw::uniform(2.0)), 0.5, 1e-10);
}

TEST(L1, EmpiricalAveragesWithWeights) {
  const auto s = wfi::Sample::from_pairs(std::vector<double>{0.0, 0.0, 1.0}, std::vector<int>{0, 1, 1});
  const StepEstimate f{{0.0, 1.0}, {0.5, 1.0}, 3};
  auto t = [](double x) { return 0.25 + 0.5 * x; };
  // |0.5-0.25| twice, |1-0.75| once
  EXPECT_NEAR(wfi::l1_error_empirical(f, t, s), 0.25, 1e-15);
}

TEST(L1, DispatchMatchesDirectCalls) {
  auto t = [](double x) { return 0.5 + 0.1 * x; };
  const StepEstimate f{{-1.0, 0.2}, {0.4, 0.7}, 5};
  wfi::L1Context ctx;
  const auto law = FeatureLaw::uniform();
  ctx.law = &law;
  EXPECT_EQ(wfi::l1_error(f, t, wfi::Measure::lebesgue, ctx), wfi::l1_error_lebesgue(f, t, -1.0, 1.0));
  EXPECT_EQ(wfi::l1_error(f, t, wfi::Measure::feature_law, ctx), wfi::l1_error_feature_law(f, t, law));
  EXPECT_THROW(wfi::l1_error(f, t, wfi::Measure::empirical, ctx), wfi::InvalidArgument);
}

TEST(Sup, ConstantMatchIsZero) {
  auto t = [](double) { return 0.4; };
  EXPECT_EQ(wfi::sup_norm_on(constant_step(0.4), t, -1.0, 1.0), 0.0);
}

TEST(Sup, ZeroAgainstConstant) {
  auto t = [](double) { return 0.3; };
  EXPECT_NEAR(wfi::sup_norm_on(constant_step(0.0), t, -1.0, 1.0), 0.3, 1e-15);
}

// Candidates: both interval ends and both sides of the jump.
TEST(Sup, SingleJumpAgainstAffine) {
  const StepEstimate f{{-1.0, 0.0}, {0.1, 0.9}, 2};
  auto t = [](double x) { return 0.5 + 0.25 * x; };
  const double expected =
      std::max({std::abs(0.1 - t(-1.0)), std::abs(0.1 - t(0.0)), std::abs(0.9 - t(0.0)), std::abs(0.9 - t(1.0))});
  EXPECT_NEAR(wfi::sup_norm_on(f, t, -1.0, 1.0), expected, 1e-15);
}

TEST(Sup, AgreesWithDenseScan) {
  const StepEstimate f{{-0.8, -0.1, 0.3, 0.6}, {0.2, 0.35, 0.5, 0.8}, 10};
  auto t = [](double x) { return 0.5 + 0.3 * std::tanh(2.0 * x); };
  double scan = 0.0;
  for (int i = 0; i <= 200000; ++i) {
    const double x = -0.5 + i * 1e-5 * 1.0;
    if (x > 0.5) break;
    scan = std::max(scan, std::abs(f(x) - t(x)));
  }
  const double exact = wfi::sup_norm_on(f, t, -0.5, 0.5);
  EXPECT_GE(exact, scan - 1e-15);
  EXPECT_LE(exact, scan + 1e-4);
}

TEST(KS, IdenticalIsZero) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_EQ(wfi::ks_two_sample(a, a), 0.0);
}

TEST(KS, DisjointIsOne) { EXPECT_EQ(wfi::ks_two_sample(std::vector<double>{0.0}, std::vector<double>{1.0}), 1.0); }

TEST(KS, InterleavedPairs) {
  EXPECT_DOUBLE_EQ(wfi::ks_two_sample(std::vector<double>{1.0, 2.0}, std::vector<double>{1.5, 2.5}), 0.5);
}

TEST(KS, TiesAcrossSamples) {
  EXPECT_DOUBLE_EQ(wfi::ks_two_sample(std::vector<double>{1.0, 1.0, 2.0}, std::vector<double>{1.0, 2.0, 2.0}),
                   1.0 / 3.0);
}

TEST(KS, OneSampleUniform) {
  std::vector<double> a;
  for (int i = 0; i < 10; ++i) a.push_back((i + 0.5) / 10.0);
  EXPECT_NEAR(wfi::ks_one_sample(a, [](double x) { return x; }), 0.05, 1e-15);
}

// The partial-sum representation dominates the empirical L1 distance of the
// NPMLE from a constant, and equals it when the fit is substituted.
TEST(Representation, JumpIdentity) {
  wfi::Scenario scn;
  scn.impact_exponent = 0.9;
  wfi::Rng rng(31);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = wfi::sample_dataset(scn, 500, rng);
    const auto fit = wfi::npmle_fit(s);
    auto p0 = [](double) { return 0.5; };
    const double l1 = wfi::l1_error_empirical(fit, p0, s);
    EXPECT_NEAR(wfi::jump_representation(fit, s, 0.5), l1, 1e-12);
    EXPECT_GE(wfi::an_process_max(s, 0.5), l1 - 1e-12);
  }
}

TEST(Stats, ExactPowerLawSlope) {
  std::vector<double> ns{100, 200, 400, 800};
  std::vector<double> es;
  for (double n : ns) es.push_back(3.0 * std::pow(n, -1.0 / 3.0));
  EXPECT_NEAR(wfi::fit_loglog_slope(ns, es).slope, -1.0 / 3.0, 1e-12);
}

TEST(Stats, ConstantErrorsGiveZeroSlope) {
  std::vector<double> ns{100, 200, 400};
  std::vector<double> es{0.1, 0.1, 0.1};
  EXPECT_NEAR(wfi::fit_loglog_slope(ns, es).slope, 0.0, 1e-12);
}

TEST(Stats, NoisyHalfPowerSlope) {
  wfi::Rng rng(4);
  wfi::NormalSource normal;
  std::vector<double> ns;
  std::vector<double> es;
  for (int k = 9; k <= 15; ++k) {
    const double n = std::pow(2.0, k);
    ns.push_back(n);
    es.push_back(std::pow(n, -0.5) * (1.0 + 0.01 * normal(rng)));
  }
  EXPECT_NEAR(wfi::fit_loglog_slope(ns, es).slope, -0.5, 0.02);
}

TEST(Stats, SlopeNeedsThreePositivePoints) {
  std::vector<double> two{1, 2};
  EXPECT_THROW(wfi::fit_loglog_slope(two, two), wfi::InvalidArgument);
  std::vector<double> ns{1, 2, 3};
  std::vector<double> bad{1, 0, 1};
  EXPECT_THROW(wfi::fit_loglog_slope(ns, bad), wfi::InvalidArgument);
}

TEST(Stats, MedianAndMean) {
  std::vector<double> v{3, 1, 2, 10};
  EXPECT_EQ(wfi::median(v), 2.5);
  const auto m = wfi::mean_se(v);
  EXPECT_EQ(m.mean, 4.0);
  EXPECT_NEAR(m.sd, std::sqrt(((1.0 + 9.0 + 4.0 + 36.0)) / 3.0), 1e-12);
}

}  // namespace
