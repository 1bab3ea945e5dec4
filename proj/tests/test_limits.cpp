#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <wfi/limits.hpp>
#include <wfi/metrics.hpp>
#include <wfi/stats.hpp>

namespace {

using wfi::FeatureLaw;
using wfi::LinkSpec;
using wfi::PathGrid;
using wfi::Rng;

TEST(Brownian, PinnedAtZero) {
  const PathGrid g{2.0, 0.01, true};
  const auto z = wfi::brownian_path(g, 7);
  EXPECT_EQ(z[g.origin()], 0.0);
  EXPECT_EQ(z.size(), 401u);
}

TEST(Brownian, VarianceAndCovariance) {
  const PathGrid g{1.0, 0.01, false};
  const std::size_t M = 100000;
  std::vector<double> a(M), b(M);
  const auto e = wfi::experiment_id("test_brownian");
  for (std::size_t i = 0; i < M; ++i) {
    Rng rng(11, e, static_cast<std::uint32_t>(i));
    const auto z = wfi::brownian_path(g, rng);
    a[i] = z[50];
    b[i] = z[100];
  }
  EXPECT_NEAR(wfi::covariance(b, b).cov, 1.0, 0.02);
  EXPECT_NEAR(wfi::covariance(a, b).cov, 0.5, 0.02);
}

TEST(Chernoff, DriftOnlyPathGivesZero) {
  const auto g = wfi::chernoff_grid();
  const std::vector<double> z(g.size(), 0.0);
  EXPECT_EQ(wfi::chernoff_on_path(z, g), 0.0);
}

TEST(Chernoff, TiesGoToLargestArgument) {
  const PathGrid g{1.0, 0.01, true};
  std::vector<double> z(g.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = -g.at(i) * g.at(i);  // flat objective
  EXPECT_EQ(wfi::argmin_on_path(z, g, 1.0, 1.0, 0.0), 1.0);
}

TEST(Chernoff, CenteredWithReferenceSpread) {
  const auto g = wfi::chernoff_grid();
  const std::size_t M = 200000;
  std::vector<double> v(M);
  const auto e = wfi::experiment_id("test_chernoff");
  wfi::parallel_for(M, 0, [&](std::size_t i) {
    Rng rng(5, e, static_cast<std::uint32_t>(i));
    v[i] = wfi::chernoff_sample(g, rng);
  });
  const auto m = wfi::mean_se(v);
  EXPECT_NEAR(m.mean, 0.0, 0.01);
  // half-width of a 95% interval for the sd
  const double half = 1.96 * m.sd / std::sqrt(2.0 * static_cast<double>(M - 1));
  EXPECT_LE(half, 0.005);
  RecordProperty("chernoff_sd", std::to_string(m.sd));
}

TEST(Chernoff, EscapeOnTinyGridRaises) {
  // Minimiser of s^2 - 100 s sits at 50, far beyond 8 times S.
  Rng rng(3);
  EXPECT_THROW(wfi::argmin_drifted(0.0, 1.0, 100.0, PathGrid{0.1, 0.001, true}, rng), wfi::NumericalError);
}

TEST(Kappa, LogisticUniformCenter) {
  const double k = wfi::scaled_chernoff_constant(LinkSpec::logistic(), FeatureLaw::uniform(), 0.0);
  EXPECT_NEAR(k, std::cbrt(0.5), 1e-12);
}

TEST(Kappa, DensityHomogeneity) {
  const auto link = LinkSpec::logistic();
  const double k1 = wfi::scaled_chernoff_constant(link, FeatureLaw::uniform(1.0), 0.0);
  const double k2 = wfi::scaled_chernoff_constant(link, FeatureLaw::uniform(0.5), 0.0);
  EXPECT_NEAR(k2 / k1, std::pow(2.0, -1.0 / 3.0), 1e-12);
}

TEST(Kappa, FlatLinkRejected) {
  EXPECT_THROW(wfi::scaled_chernoff_constant(LinkSpec::beta_flat(3), FeatureLaw::uniform(), 0.0),
               wfi::InvalidArgument);
}

TEST(SlowLimit, ZeroNoiseGivesZero) {
  const PathGrid g{2.0, 0.01, true};
  const std::vector<double> z(g.size(), 0.0);
  // The grid chord ending at 0 has slope -coef h^beta.
  EXPECT_NEAR(wfi::fbeta_slope_on_path(z, g, 0.0, 0.7, 1), 0.0, 0.7 * g.h + 1e-12);
  EXPECT_NEAR(wfi::fbeta_slope_on_path(z, g, 0.0, 0.7, 3), 0.0, 0.7 * std::pow(g.h, 3) + 1e-12);
}

TEST(SlowLimit, SignFlipSymmetry) {
  const auto link = LinkSpec::logistic();
  const auto law = FeatureLaw::uniform();
  const auto g = wfi::fbeta_grid(link, law, 0.0);
  const double coef = wfi::fbeta_drift_coefficient(link, law, 0.0);
  const std::size_t M = 4000;
  std::vector<double> v;
  for (std::size_t i = 0; i < M; ++i) {
    auto z = wfi::brownian_path(g, 100 + i);
    const double a = wfi::fbeta_slope_on_path(z, g, link.sigma(), coef, 1);
    for (auto& x : z) x = -x;
    std::reverse(z.begin(), z.end());  // Z(-s) reflected
    const double b = wfi::fbeta_slope_on_path(z, g, link.sigma(), coef, 1);
    v.push_back(a);
    v.push_back(b);
  }
  const auto m = wfi::mean_se(v);
  EXPECT_LE(std::abs(m.mean), 3.0 * m.sd / std::sqrt(static_cast<double>(M)));
}

TEST(SlowLimit, BetaMismatchRejected) {
  Rng rng(1);
  EXPECT_THROW(wfi::slow_limit_sample(3, LinkSpec::logistic(), FeatureLaw::uniform(), 0.0, wfi::chernoff_grid(), rng),
               wfi::InvalidArgument);
}

TEST(BoundaryDrift, Examples) {
  const auto link = LinkSpec::logistic();
  const auto law = FeatureLaw::uniform();
  const double c = 2.0;
  EXPECT_EQ(wfi::boundary_drift(1, c, link, law, 0.0, 0.0), 0.0);
  EXPECT_NEAR(wfi::boundary_drift(1, c, link, law, 0.0, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(wfi::boundary_drift(1, c, link, law, 0.0, 0.5), -std::sqrt(c) * 0.25 / 4.0, 1e-12);
  EXPECT_NEAR(wfi::boundary_drift(1, c, link, law, 0.0, 0.3), std::sqrt(c) * 0.25 * (0.09 - 0.3), 1e-12);
}

TEST(BoundaryDrift, TableMatchesPointwise) {
  const auto link = LinkSpec::logistic();
  const auto law = FeatureLaw::polynomial(1.0, 0.3, 0.1);
  const PathGrid g{1.0, 0.01, false};
  const auto table = wfi::boundary_drift_table(1, 1.5, link, law, 0.2, g);
  for (std::size_t i = 0; i < table.size(); i += 7) {
    EXPECT_NEAR(table[i], wfi::boundary_drift(1, 1.5, link, law, 0.2, g.at(i)), 1e-10);
  }
}

TEST(BoundaryLimit, ZeroPathReturnsDriftHullSlope) {
  const auto link = LinkSpec::logistic();
  const auto law = FeatureLaw::uniform();
  const PathGrid g{1.0, 0.001, false};
  const double c = 100.0;
  const auto drift = wfi::boundary_drift_table(1, c, link, law, 0.0, g);
  const std::vector<double> w(g.size(), 0.0);
  // drift is sqrt(c)/4 (s^2 - s): convex, derivative sqrt(c)/4 (2s - 1)
  const double t0 = 0.75;
  const double got = wfi::boundary_slope_on_path(w, drift, g, link.sigma(), t0);
  EXPECT_NEAR(got, std::sqrt(c) / 4.0 * (2.0 * t0 - 1.0), 0.01);
}

TEST(BoundaryLimit, ZeroCMatchesFastLaw) {
  const auto link = LinkSpec::logistic();
  const auto law = FeatureLaw::uniform();
  const auto g = wfi::unit_grid();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng a(s);
    Rng b(s);
    const double x = wfi::boundary_limit_sample(1, 0.0, link, law, 0.3, g, a);
    const auto w = wfi::brownian_path(g, b);
    std::vector<double> zero(g.size(), 0.0);
    EXPECT_EQ(x, wfi::boundary_slope_on_path(w, zero, g, link.sigma(), law.cdf(0.3)));
  }
}

TEST(BoundaryLimit, ContinuityOrdering) {
  wfi::LimitRequest r;
  r.law = wfi::LimitLaw::boundary_gbc;
  r.x0 = 0.2;
  auto batch = [&](double c) {
    r.c = c;
    return wfi::simulate_limit(r, 20000, 77, 0).draws;
  };
  const auto b0 = batch(0.0);
  const auto b09 = batch(0.9);
  const auto b11 = batch(1.1);
  const auto b4 = batch(4.0);
  EXPECT_LE(wfi::ks_two_sample(b09, b11), wfi::ks_two_sample(b0, b4));
}

TEST(BoundaryLimit, BoundaryPointRejected) {
  Rng rng(1);
  EXPECT_THROW(wfi::boundary_limit_sample(1, 1.0, LinkSpec::logistic(), FeatureLaw::uniform(), 1.0,
                                          wfi::unit_grid(), rng),
               wfi::InvalidArgument);
}

TEST(L1FastLimit, ZeroPath) {
  const std::vector<double> w(101, 0.0);
  EXPECT_EQ(wfi::l1_fast_on_path(w, 0.5), 0.0);
}

TEST(L1FastLimit, DrawsDominateAbsoluteEndpoint) {
  const auto g = wfi::unit_grid(1e-3);
  for (std::uint64_t s = 0; s < 500; ++s) {
    const auto w = wfi::brownian_path(g, s);
    const double d = wfi::l1_fast_on_path(w, 1.0);
    EXPECT_GE(d, std::abs(w.back()));
  }
}

// Cov(W(1) - 2W(u), W(1) - 2W(v)) = 1 - 2|u - v|, checked on simulated paths.
TEST(L1FastLimit, RepresentationCovariance) {
  const PathGrid g{1.0, 0.01, false};
  const std::vector<std::size_t> idx{10, 30, 50, 70, 90};
  const std::size_t M = 100000;
  std::vector<std::vector<double>> a(idx.size(), std::vector<double>(M));
  for (std::size_t i = 0; i < M; ++i) {
    const auto w = wfi::brownian_path(g, 1000 + i);
    for (std::size_t k = 0; k < idx.size(); ++k) a[k][i] = w.back() - 2.0 * w[idx[k]];
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double target = 1.0 - 2.0 * std::abs(g.at(idx[j]) - g.at(idx[k]));
      const auto c = wfi::covariance(a[j], a[k]);
      EXPECT_LE(std::abs(c.cov - target), 3.0 * c.se + 1e-3);
    }
  }
}

TEST(AbsMean, SeShrinksWithM) {
  const auto g = wfi::chernoff_grid();
  const auto e1 = wfi::chernoff_abs_mean(g, 10000, 1, 0);
  const auto e4 = wfi::chernoff_abs_mean(g, 40000, 1, 0);
  EXPECT_GT(e1.value, 0.0);
  EXPECT_NEAR(e4.se / e1.se, 0.5, 0.1);
  // refinement h -> h/2
  const auto fine = wfi::chernoff_abs_mean(PathGrid{4.0, 0.001, true}, 10000, 2, 0);
  EXPECT_LE(std::abs(fine.value - e1.value), 2.0 * std::hypot(fine.se, e1.se));
}

TEST(CovIntegral, ShapeAndStationarity) {
  const double a_max = 3.0;
  const auto r = wfi::chernoff_cov_integral(wfi::cov_grid(a_max), a_max, 0.25, 50000, 9, 0, 100);
  ASSERT_EQ(r.as.size(), 13u);
  EXPECT_GT(r.cov[0], 0.0);
  EXPECT_LE(std::abs(r.cov.back()), 2.0 * r.cov_se.back());
  EXPECT_GT(r.integral.value, 0.0);
  EXPECT_GT(r.integral.se, 0.0);
}

TEST(CovIntegral, ShiftedArgminMatchesCentered) {
  const double a_max = 3.0;
  const auto g = wfi::cov_grid(a_max);
  const std::vector<double> as{0.0, 2.0};
  const std::size_t M = 50000;
  std::vector<double> x0(M), x2(M);
  const auto e = wfi::experiment_id("test_stationarity");
  wfi::parallel_for(M, 0, [&](std::size_t i) {
    Rng rng(21, e, static_cast<std::uint32_t>(i));
    const auto z = wfi::brownian_path(g, rng);
    const auto xs = wfi::argmin_family_on_path(z, g, as);
    x0[i] = xs[0];
    x2[i] = xs[1] - 2.0;
  });
  EXPECT_LE(wfi::ks_two_sample(x0, x2), 0.02);
}

TEST(CovIntegral, FamilyMatchesDirectArgmin) {
  const auto g = wfi::cov_grid(3.0);
  const std::vector<double> as{0.0, 0.5, 1.25, 3.0};
  for (std::uint64_t s = 0; s < 30; ++s) {
    const auto z = wfi::brownian_path(g, s);
    const auto xs = wfi::argmin_family_on_path(z, g, as);
    for (std::size_t j = 0; j < as.size(); ++j) {
      EXPECT_NEAR(xs[j], wfi::argmin_on_path(z, g, 1.0, 1.0, 2.0 * as[j]), 1e-12);
    }
  }
}

TEST(Constants, MuNSmallDeltaLimit) {
  wfi::Scenario scn;
  scn.impact_exponent = 1.0;
  const double v = wfi::mu_n(scn, 1e30, 1.0);
  EXPECT_NEAR(v, 2.0 * std::cbrt(0.5), 1e-9);
  EXPECT_GT(wfi::mu_n(scn, 100.0, 0.3), 0.0);
}

TEST(Constants, SigmaSq) {
  const auto link = LinkSpec::logistic();
  const auto law = FeatureLaw::uniform();
  EXPECT_NEAR(wfi::sigma_sq(link, law, 0.1), 0.8, 1e-12);
  EXPECT_NEAR(wfi::sigma_sq(link, law, 0.05), 0.4, 1e-12);
  EXPECT_GT(wfi::sigma_sq(link, law, 0.01), 0.0);
}

TEST(Batch, DeterministicAcrossThreads) {
  wfi::LimitRequest r;
  const auto a = wfi::simulate_limit(r, 200, 42, 1);
  const auto b = wfi::simulate_limit(r, 200, 42, 4);
  EXPECT_EQ(a.draws, b.draws);
  EXPECT_EQ(a.params.back().first, "kappa");
}

TEST(Batch, L1FastDrawsNonnegative) {
  wfi::LimitRequest r;
  r.law = wfi::LimitLaw::l1_fast_maxA;
  const auto b = wfi::simulate_limit(r, 1000, 8, 0);
  for (double d : b.draws) EXPECT_GE(d, 0.0);
}

TEST(Batch, LawNamesRoundTrip) {
  for (auto k : {wfi::LimitLaw::scaled_chernoff, wfi::LimitLaw::slow_fbeta, wfi::LimitLaw::boundary_gbc,
                 wfi::LimitLaw::fast_w_slope, wfi::LimitLaw::l1_fast_maxA}) {
    EXPECT_EQ(wfi::limit_law_from_string(wfi::to_string(k)), k);
  }
  EXPECT_THROW(wfi::limit_law_from_string("cauchy"), wfi::InvalidArgument);
}

}  // namespace
