#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <wfi/model.hpp>
#include <wfi/quadrature.hpp>

namespace {

using wfi::FeatureLaw;
using wfi::LinkSpec;

std::vector<LinkSpec> smooth_links() {
  return {LinkSpec::logistic(), LinkSpec::probit(), LinkSpec::beta_flat(1), LinkSpec::beta_flat(3),
          LinkSpec::beta_flat(5)};
}

TEST(Link, LogisticAtZeroIsHalf) { EXPECT_DOUBLE_EQ(LinkSpec::logistic().value(0.0), 0.5); }

TEST(Link, LogisticSaturates) { EXPECT_NEAR(LinkSpec::logistic().value(50.0), 1.0, 1e-15); }

TEST(Link, LogisticFirstDerivative) { EXPECT_NEAR(LinkSpec::logistic().derivative(0.0, 1), 0.25, 1e-15); }

TEST(Link, BetaFlatThreeDerivatives) {
  const auto l = LinkSpec::beta_flat(3);
  EXPECT_DOUBLE_EQ(l.value(0.0), 0.5);
  EXPECT_EQ(l.derivative(0.0, 1), 0.0);
  EXPECT_EQ(l.derivative(0.0, 2), 0.0);
  EXPECT_NEAR(l.derivative(0.0, 3), 1.5, 1e-14);
  EXPECT_NEAR(l.leading_derivative(), 1.5, 1e-14);
}

TEST(Link, EvenBetaRejected) { EXPECT_THROW(LinkSpec::beta_flat(2), wfi::InvalidArgument); }

TEST(Link, OrderBeyondSupportRejected) {
  EXPECT_THROW(LinkSpec::logistic().derivative(0.0, 9), wfi::InvalidArgument);
  EXPECT_THROW(LinkSpec::logistic().derivative(0.0, 0), wfi::InvalidArgument);
}

TEST(Link, ValuesInUnitIntervalAndMonotone) {
  for (const auto& l : smooth_links()) {
    double prev = -1.0;
    for (int i = -400; i <= 400; ++i) {
      const double v = l.value(i * 0.05);
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
      ASSERT_GE(v, prev);
      prev = v;
    }
    const double p0 = l.value(0.0);
    EXPECT_GT(p0, 0.0);
    EXPECT_LT(p0, 1.0);
  }
}

TEST(Link, LeadingDerivativePositiveLowerOrdersVanish) {
  for (const auto& l : smooth_links()) {
    EXPECT_GT(l.leading_derivative(), 0.0);
    for (int k = 1; k < l.beta; ++k) EXPECT_NEAR(l.derivative(0.0, k), 0.0, 1e-14);
  }
}

// Central differences of the (k-1)th analytic derivative against the kth.
TEST(Link, DerivativesMatchFiniteDifferences) {
  for (const auto& l : smooth_links()) {
    for (int k = 1; k <= 6; ++k) {
      for (double u : {0.0, 0.3, -0.7}) {
        const double h = 1e-5;
        auto lower = [&](double x) { return k == 1 ? l.value(x) : l.derivative(x, k - 1); };
        const double fd = (lower(u + h) - lower(u - h)) / (2.0 * h);
        const double exact = l.derivative(u, k);
        const double scale = std::max(std::abs(exact), 1e-3);
        EXPECT_NEAR(fd, exact, 1e-6 * scale + 1e-9) << wfi::to_string(l.kind) << " order " << k << " at " << u;
      }
    }
  }
}

TEST(Link, AffineClampedDerivative) {
  const auto l = LinkSpec::affine_clamped(0.5, 0.25);
  EXPECT_DOUBLE_EQ(l.value(1.0), 0.75);
  EXPECT_DOUBLE_EQ(l.derivative(0.0, 1), 0.25);
  EXPECT_EQ(l.derivative(0.0, 2), 0.0);
  EXPECT_EQ(l.value(10.0), 1.0);
}

TEST(Law, UniformBasics) {
  const auto law = FeatureLaw::uniform();
  EXPECT_DOUBLE_EQ(law.density(0.0), 0.5);
  EXPECT_DOUBLE_EQ(law.quantile(0.75), 0.5);
  EXPECT_DOUBLE_EQ(law.cdf(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(law.cdf(1.0), 1.0);
}

TEST(Law, PolynomialRejectsVanishingDensity) {
  EXPECT_THROW(FeatureLaw::polynomial(1.0, 1.5, 0.0), wfi::InvalidArgument);
}

TEST(Law, DensityCdfQuantileConsistent) {
  for (const auto& law : {FeatureLaw::uniform(2.0), FeatureLaw::polynomial(1.0, 0.4, 0.3),
                          FeatureLaw::polynomial(1.5, -0.5, 0.2)}) {
    const double T = law.T();
    wfi::QuadratureCfg q;
    q.abs_tol = 1e-12;
    EXPECT_NEAR(wfi::integrate([&](double x) { return law.density(x); }, -T, T, q), 1.0, 1e-10);
    EXPECT_EQ(law.cdf(-T), 0.0);
    EXPECT_EQ(law.cdf(T), 1.0);
    for (int i = 0; i <= 100; ++i) {
      const double s = i / 100.0;
      EXPECT_NEAR(law.cdf(law.quantile(s)), s, 1e-10);
    }
    for (int i = 1; i < 20; ++i) {
      const double x = -T + 2.0 * T * i / 20.0;
      const double h = 1e-5;
      EXPECT_NEAR((law.cdf(x + h) - law.cdf(x - h)) / (2.0 * h), law.density(x), 1e-6);
      EXPECT_GT(law.density(x), 0.0);
    }
  }
}

TEST(Scenario, WorkedValue) {
  wfi::Scenario s;
  s.impact_scale = 1.0;
  s.impact_exponent = 0.5;
  EXPECT_NEAR(s.phi_n(4.0, 1.0), 1.0 / (1.0 + std::exp(-0.5)), 1e-15);
  EXPECT_NEAR(s.phi_n(4.0, 1.0), 0.6224593, 1e-7);
}

TEST(Scenario, OriginGivesBaseValue) {
  wfi::Scenario s;
  s.link = LinkSpec::probit();
  s.impact_exponent = 0.3;
  for (double n : {1.0, 10.0, 1e6}) EXPECT_EQ(s.phi_n(n, 0.0), s.link.value(0.0));
}

TEST(Scenario, FixedScheduleIgnoresN) {
  wfi::Scenario s;
  s.impact_exponent = 0.0;
  EXPECT_EQ(s.phi_n(10.0, 0.7), s.phi_n(1e5, 0.7));
}

TEST(Scenario, DeltaPositiveNonincreasing) {
  wfi::Scenario s;
  s.impact_scale = 2.0;
  s.impact_exponent = 0.4;
  double prev = INFINITY;
  for (double n = 1; n < 1e7; n *= 3) {
    const double d = s.delta(n);
    EXPECT_GT(d, 0.0);
    EXPECT_LE(d, prev);
    prev = d;
  }
}

TEST(Sample, SingleObservation) {
  wfi::Scenario s;
  const auto sm = wfi::sample_dataset(s, 1, 5);
  ASSERT_EQ(sm.size(), 1);
  EXPECT_TRUE(sm.ones[0] == 0 || sm.ones[0] == 1);
}

TEST(Sample, DeterministicPerSeed) {
  wfi::Scenario s;
  s.impact_exponent = 0.25;
  const auto a = wfi::sample_dataset(s, 500, 77);
  const auto b = wfi::sample_dataset(s, 500, 77);
  EXPECT_EQ(a.xs, b.xs);
  EXPECT_EQ(a.ones, b.ones);
  EXPECT_EQ(a.weights, b.weights);
}

TEST(Sample, ConstantOneLinkGivesAllOnes) {
  wfi::Scenario s;
  s.link = LinkSpec::constant(1.0);
  const auto sm = wfi::sample_dataset(s, 300, 3);
  EXPECT_EQ(sm.total_ones(), 300);
}

TEST(Sample, InvariantsHold) {
  wfi::Scenario s;
  s.law = FeatureLaw::polynomial(2.0, 0.3, 0.1);
  const auto sm = wfi::sample_dataset(s, 2000, 11);
  EXPECT_NO_THROW(sm.validate());
  EXPECT_EQ(sm.size(), 2000);
  for (double x : sm.xs) {
    EXPECT_GE(x, -2.0);
    EXPECT_LE(x, 2.0);
  }
}

TEST(Sample, FromPairsAggregatesTies) {
  const std::vector<double> x{2.0, 1.0, 2.0, 3.0};
  const std::vector<int> y{1, 0, 0, 1};
  const auto s = wfi::Sample::from_pairs(x, y);
  EXPECT_EQ(s.xs, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_EQ(s.weights, (std::vector<std::int64_t>{1, 2, 1}));
  EXPECT_EQ(s.ones, (std::vector<std::int64_t>{0, 1, 1}));
}

TEST(Sample, FromPairsRejectsBadLabels) {
  const std::vector<double> x{1.0};
  const std::vector<int> y{2};
  EXPECT_THROW(wfi::Sample::from_pairs(x, y), wfi::InvalidArgument);
}

}  // namespace
