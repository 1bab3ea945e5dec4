#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <wfi/experiments.hpp>
#include <wfi/io.hpp>

namespace {

using wfi::Regime;

TEST(Regime, Classification) {
  EXPECT_EQ(wfi::regime_of(0.0, 1), Regime::slow);
  EXPECT_EQ(wfi::regime_of(0.25, 1), Regime::slow);
  EXPECT_EQ(wfi::regime_of(0.5, 1), Regime::boundary);
  EXPECT_EQ(wfi::regime_of(0.8, 1), Regime::fast);
  EXPECT_EQ(wfi::regime_of(1.0 / 6.0, 3), Regime::boundary);
  EXPECT_EQ(wfi::regime_of(0.2, 3), Regime::fast);
}

TEST(Regime, TargetSlopes) {
  EXPECT_NEAR(wfi::target_rate_slope(0.0, 1), -1.0 / 3.0, 1e-15);
  EXPECT_NEAR(wfi::target_rate_slope(0.25, 1), -0.4166666666666667, 1e-15);
  EXPECT_EQ(wfi::target_rate_slope(0.8, 1), -0.5);
  EXPECT_EQ(wfi::target_rate_slope(0.5, 1), -0.5);
}

TEST(Checks, Relations) {
  EXPECT_TRUE(wfi::make_check("a", 1.0, "<=", 1.0).pass);
  EXPECT_FALSE(wfi::make_check("a", 1.0, "<", 1.0).pass);
  EXPECT_TRUE(wfi::make_check("a", 2.0, ">", 1.0).pass);
  EXPECT_THROW(wfi::make_check("a", 1.0, "==", 1.0), wfi::InvalidArgument);
}

TEST(LambdaInverse, CenterOfSymmetricScenario) {
  wfi::Scenario scn;
  scn.impact_exponent = 0.25;
  EXPECT_NEAR(wfi::lambda_inverse(scn, 1000.0, 0.5), 0.5, 1e-10);
  const double x = 0.3;
  EXPECT_NEAR(wfi::lambda_inverse(scn, 1000.0, scn.phi_n(1000.0, x)), scn.law.cdf(x), 1e-10);
}

wfi::RateStudyConfig small_rate() {
  wfi::RateStudyConfig c;
  c.gammas = {0.0, 0.8};
  c.n_list = {256, 512, 1024};
  c.M = 50;
  c.seed = 17;
  return c;
}

TEST(RateStudy, RecordCountAndSummaries) {
  const auto r = wfi::run_rate_study(small_rate());
  EXPECT_EQ(r.records.size(), 2u * 3u * 50u);
  ASSERT_EQ(r.summaries.size(), 2u);
  EXPECT_EQ(r.summaries[1].target_slope, -0.5);
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.err_pointwise, 0.0);
    EXPECT_GT(rec.err_l1, 0.0);
  }
}

TEST(RateStudy, BitwiseDeterministicAcrossThreads) {
  auto c = small_rate();
  const auto a = wfi::io::rate_csv(wfi::run_rate_study(c));
  c.threads = 3;
  EXPECT_EQ(a, wfi::io::rate_csv(wfi::run_rate_study(c)));
}

TEST(RateStudy, SeedChangesRecords) {
  auto c = small_rate();
  const auto a = wfi::io::rate_csv(wfi::run_rate_study(c));
  c.seed = 18;
  EXPECT_NE(a, wfi::io::rate_csv(wfi::run_rate_study(c)));
}

// Halves of the replicate pool give slope estimates that agree within two
// combined standard errors.
TEST(RateStudy, ReplicateHalvesAgree) {
  auto c = small_rate();
  c.gammas = {0.25};
  c.n_list = {512, 1024, 2048, 4096};
  c.M = 200;
  const auto r = wfi::run_rate_study(c);
  std::vector<double> ns(c.n_list.begin(), c.n_list.end());
  auto slope_for = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> med;
    for (auto n : c.n_list) {
      std::vector<double> v;
      for (const auto& rec : r.records) {
        if (rec.n == n && rec.replicate >= lo && rec.replicate < hi) v.push_back(rec.err_l1);
      }
      med.push_back(wfi::median(v));
    }
    return wfi::fit_loglog_slope(ns, med);
  };
  const auto a = slope_for(0, 100);
  const auto b = slope_for(100, 200);
  EXPECT_LE(std::abs(a.slope - b.slope), 2.0 * std::hypot(a.se, b.se));
}

TEST(RateStudy, InvalidConfigRejected) {
  auto c = small_rate();
  c.n_list = {512, 256, 1024};
  EXPECT_THROW(wfi::run_rate_study(c), wfi::InvalidArgument);
  c = small_rate();
  c.M = 10;
  EXPECT_THROW(wfi::run_rate_study(c), wfi::InvalidArgument);
}

TEST(LimitCompare, RegimeMismatchRejected) {
  wfi::LimitCompareConfig c;
  c.scenario.impact_exponent = 0.8;
  c.kind = wfi::ComparisonKind::slow_pointwise;
  EXPECT_THROW(wfi::run_limit_comparison(c), wfi::InvalidArgument);
  c.kind = wfi::ComparisonKind::boundary_pointwise;
  EXPECT_THROW(wfi::run_limit_comparison(c), wfi::InvalidArgument);
}

TEST(LimitCompare, SmallFastRunProducesStatistics) {
  wfi::LimitCompareConfig c;
  c.scenario.impact_exponent = 0.9;
  c.kind = wfi::ComparisonKind::fast_l1;
  c.n = 500;
  c.M = 100;
  c.limit_M = 500;
  c.seed = 3;
  const auto r = wfi::run_limit_comparison(c);
  EXPECT_EQ(r.finite.size(), 100u);
  EXPECT_EQ(r.limit.size(), 500u);
  EXPECT_GE(r.ks, 0.0);
  EXPECT_LE(r.ks, 1.0);
  for (double v : r.finite) EXPECT_GE(v, 0.0);
}

TEST(Audit, DefaultBudgetsHold) {
  const auto r = wfi::run_lower_bound_audit({});
  EXPECT_TRUE(wfi::all_pass(r.checks));
  ASSERT_EQ(r.items.size(), 3u);
  EXPECT_LE(r.items[0].n_d2, 0.64 + 1e-9);
  for (const auto& it : r.items) {
    EXPECT_TRUE(it.membership);
    EXPECT_LT(it.n_d2, it.alpha);
    EXPECT_LT(it.alpha, 2.0);
  }
}

TEST(TailProbe, SmallLadder) {
  wfi::TailProbeConfig c;
  c.scenario.impact_exponent = 0.25;
  c.n_list = {512, 1024, 2048};
  c.x_list = {0.001, 0.2};
  c.M = 60;
  c.seed = 2;
  const auto r = wfi::run_tail_bound_probe(c);
  ASSERT_EQ(r.cells.size(), 6u);
  EXPECT_NEAR(r.target_slope, -(1.0 - 0.5) / 3.0, 1e-15);
  for (const auto& cell : r.cells) {
    EXPECT_GE(cell.frequency, 0.0);
    EXPECT_LE(cell.frequency, 1.0);
  }
  // below the natural scale almost every replicate deviates
  EXPECT_GT(r.cells[0].frequency, 0.5);
  c.scenario.impact_exponent = 0.8;
  EXPECT_THROW(wfi::run_tail_bound_probe(c), wfi::InvalidArgument);
}

TEST(Consistency, SmallLadderShape) {
  wfi::ConsistencyConfig c;
  c.n_list = {200, 400};
  c.M = 50;
  c.sup_gammas = {0.8};
  const auto r = wfi::run_consistency_study(c);
  ASSERT_EQ(r.hellinger_medians.size(), 1u);
  ASSERT_EQ(r.sup_medians.size(), 1u);
  EXPECT_EQ(r.checks.size(), 2u);
  EXPECT_GT(r.hellinger_medians[0][0], 0.0);
}

TEST(Representation, SmallRunShape) {
  wfi::RepresentationConfig c;
  c.scenario.impact_exponent = 0.9;
  c.n = 400;
  c.M = 2000;
  c.us = {0.25, 0.75};
  const auto r = wfi::run_representation_covariance(c);
  ASSERT_EQ(r.cells.size(), 4u);
  EXPECT_NEAR(r.cells[0].target, 1.0, 1e-15);
  EXPECT_NEAR(r.cells[1].target, 0.0, 1e-15);
  EXPECT_LT(r.worst_z, 6.0);
}

}  // namespace
