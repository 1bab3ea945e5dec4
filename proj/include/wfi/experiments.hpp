#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "error.hpp"
#include "estimator.hpp"
#include "hypotheses.hpp"
#include "limits.hpp"
#include "metrics.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace wfi {

/// A named pass/fail judgement recorded in manifests.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // how value is compared to threshold, e.g. "<="
  bool pass = false;
};

inline Check make_check(std::string name, double value, std::string relation, double threshold) {
  bool pass = false;
  if (relation == "<=") pass = value <= threshold;
  else if (relation == "<") pass = value < threshold;
  else if (relation == ">=") pass = value >= threshold;
  else if (relation == ">") pass = value > threshold;
  else throw InvalidArgument("make_check: unknown relation " + relation);
  return {std::move(name), value, threshold, std::move(relation), pass};
}

inline bool all_pass(const std::vector<Check>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass; });
}

enum class Regime { slow, boundary, fast };

inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::slow: return "slow";
    case Regime::boundary: return "boundary";
    case Regime::fast: return "fast";
  }
  return "?";
}

/// Regime of the schedule delta_n = c n^{-gamma}: n delta_n^{2 beta} diverges
/// for gamma < 1/(2 beta), converges to c^{2 beta} at equality, vanishes above.
inline Regime regime_of(double gamma, int beta) {
  const double edge = 1.0 / (2.0 * beta);
  if (std::abs(gamma - edge) <= 1e-12) return Regime::boundary;
  return gamma < edge ? Regime::slow : Regime::fast;
}

/// Stream id for replicate work inside a labelled study cell.
inline std::uint32_t cell_id(const std::string& label, std::size_t a, std::size_t b = 0) {
  return experiment_id(label + ":" + std::to_string(a) + ":" + std::to_string(b));
}

/// lambda_n^{-1}(a) = F_X(Phi_n^{-1}(a)), with the generalized inverse
/// clamped to [-T, T].
inline double lambda_inverse(const Scenario& scn, double n, double a) {
  const double T = scn.law.T();
  auto phi = [&](double x) { return scn.phi_n(n, x); };
  const double x = find_crossing(phi, a, -T, T, 1e-13);
  return scn.law.cdf(x);
}

//==============================================================================
// Rate study
//==============================================================================

struct RateStudyConfig {
  Scenario scenario;  // impact_exponent is overridden by each gamma
  std::vector<double> gammas{0.0, 0.25, 0.8};
  std::vector<std::int64_t> n_list{512, 1024, 2048, 4096, 8192, 16384, 32768};
  std::size_t M = 400;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double slope_tol = 0.07;
  bool centering_check = false;  // mean (n/delta)^{1/3} L1 vs mu_n at the largest n
  double centering_tol = 0.10;
  std::size_t abs_mean_draws = 20000;
  QuadratureCfg quadrature{};

  void validate() const {
    scenario.validate();
    detail::require(!gammas.empty(), "rate study: gammas must be nonempty");
    detail::require(!n_list.empty(), "rate study: n_list must be nonempty");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
      detail::require(n_list[i] >= 1, "rate study: n must be positive");
      if (i > 0) detail::require(n_list[i] > n_list[i - 1], "rate study: n_list must be increasing");
    }
    for (double g : gammas) detail::require(g >= 0.0, "rate study: gamma must be nonnegative");
    detail::require(M >= 50, "rate study: M must be at least 50");
    const double T = scenario.law.T();
    detail::require(x0 > -T && x0 < T, "rate study: x0 must be interior");
    detail::require(slope_tol > 0.0 && centering_tol > 0.0, "rate study: tolerances must be positive");
    quadrature.validate();
  }
};

struct RateRecord {
  double gamma = 0.0;
  std::int64_t n = 0;
  std::size_t replicate = 0;
  double err_pointwise = 0.0;
  double err_l1 = 0.0;
};

struct Centering {
  double mean_scaled = 0.0;
  double se = 0.0;
  double abs_mean = 0.0;
  double abs_mean_se = 0.0;
  double mu = 0.0;
  double rel_err = 0.0;
};

struct GammaSummary {
  double gamma = 0.0;
  double target_slope = 0.0;
  std::vector<double> median_pointwise;
  std::vector<double> median_l1;
  bool slopes_fitted = false;
  SlopeFit pointwise;
  SlopeFit l1;
  bool has_centering = false;
  Centering centering;
};

struct RateStudyResult {
  std::vector<RateRecord> records;
  std::vector<GammaSummary> summaries;
  std::vector<Check> checks;
};

/// Target log-log slope: -min(1/2, (1 + gamma) beta / (2 beta + 1)).
inline double target_rate_slope(double gamma, int beta) {
  return -std::min(0.5, (1.0 + gamma) * beta / (2.0 * beta + 1.0));
}

inline RateStudyResult run_rate_study(const RateStudyConfig& cfg) {
  cfg.validate();
  RateStudyResult out;
  const std::size_t G = cfg.gammas.size();
  const std::size_t K = cfg.n_list.size();
  out.records.resize(G * K * cfg.M);
  const double T = cfg.scenario.law.T();

  for (std::size_t gi = 0; gi < G; ++gi) {
    Scenario scn = cfg.scenario;
    scn.impact_exponent = cfg.gammas[gi];
    for (std::size_t ni = 0; ni < K; ++ni) {
      const std::int64_t n = cfg.n_list[ni];
      const std::uint32_t e = cell_id("rate", gi, ni);
      const double nd = static_cast<double>(n);
      const double truth_x0 = scn.phi_n(nd, cfg.x0);
      parallel_for(cfg.M, cfg.threads, [&](std::size_t r) {
        Rng rng(cfg.seed, e, static_cast<std::uint32_t>(r));
        const Sample s = sample_dataset(scn, n, rng);
        const StepEstimate fit = npmle_fit(s);
        auto target = [&](double x) { return scn.phi_n(nd, x); };
        RateRecord& rec = out.records[(gi * K + ni) * cfg.M + r];
        rec.gamma = cfg.gammas[gi];
        rec.n = n;
        rec.replicate = r;
        rec.err_pointwise = std::abs(fit(cfg.x0) - truth_x0);
        rec.err_l1 = l1_error_lebesgue(fit, target, -T, T, cfg.quadrature);
      });
    }
  }

  for (std::size_t gi = 0; gi < G; ++gi) {
    GammaSummary g;
    g.gamma = cfg.gammas[gi];
    g.target_slope = target_rate_slope(g.gamma, cfg.scenario.beta());
    std::vector<double> ns;
    for (std::size_t ni = 0; ni < K; ++ni) {
      std::vector<double> pw(cfg.M);
      std::vector<double> l1(cfg.M);
      for (std::size_t r = 0; r < cfg.M; ++r) {
        const auto& rec = out.records[(gi * K + ni) * cfg.M + r];
        pw[r] = rec.err_pointwise;
        l1[r] = rec.err_l1;
      }
      g.median_pointwise.push_back(median(pw));
      g.median_l1.push_back(median(l1));
      ns.push_back(static_cast<double>(cfg.n_list[ni]));
    }
    if (K >= 3) {
      g.slopes_fitted = true;
      g.pointwise = fit_loglog_slope(ns, g.median_pointwise);
      g.l1 = fit_loglog_slope(ns, g.median_l1);
      const std::string tag = "gamma=" + std::to_string(g.gamma);
      out.checks.push_back(make_check("pointwise slope deviation " + tag,
                                      std::abs(g.pointwise.slope - g.target_slope), "<=", cfg.slope_tol));
      out.checks.push_back(
          make_check("l1 slope deviation " + tag, std::abs(g.l1.slope - g.target_slope), "<=", cfg.slope_tol));
    }
    if (cfg.centering_check && regime_of(g.gamma, cfg.scenario.beta()) == Regime::slow) {
      Scenario scn = cfg.scenario;
      scn.impact_exponent = g.gamma;
      const double nd = static_cast<double>(cfg.n_list.back());
      const double scale = std::cbrt(nd / scn.delta(nd));
      std::vector<double> scaled(cfg.M);
      for (std::size_t r = 0; r < cfg.M; ++r) {
        scaled[r] = scale * out.records[(gi * K + K - 1) * cfg.M + r].err_l1;
      }
      const auto ms = mean_se(scaled);
      const auto am = chernoff_abs_mean(chernoff_grid(), cfg.abs_mean_draws,
                                        cfg.seed ^ 0x9e3779b97f4a7c15ull, cfg.threads);
      g.has_centering = true;
      g.centering.mean_scaled = ms.mean;
      g.centering.se = ms.se;
      g.centering.abs_mean = am.value;
      g.centering.abs_mean_se = am.se;
      g.centering.mu = mu_n(scn, nd, am.value, cfg.quadrature);
      g.centering.rel_err = std::abs(ms.mean - g.centering.mu) / g.centering.mu;
      const std::string tag = "gamma=" + std::to_string(g.gamma);
      out.checks.push_back(make_check("l1 centering relative error " + tag, g.centering.rel_err, "<=",
                                      cfg.centering_tol));
      out.checks.push_back(make_check("E|X(0)| standard error", am.se, "<=", 0.005));
    }
    out.summaries.push_back(std::move(g));
  }
  return out;
}

//==============================================================================
// Limit comparison
//==============================================================================

enum class ComparisonKind { slow_pointwise, fast_pointwise, boundary_pointwise, fast_l1, slow_l1 };

inline std::string to_string(ComparisonKind k) {
  switch (k) {
    case ComparisonKind::slow_pointwise: return "slow_pointwise";
    case ComparisonKind::fast_pointwise: return "fast_pointwise";
    case ComparisonKind::boundary_pointwise: return "boundary_pointwise";
    case ComparisonKind::fast_l1: return "fast_l1";
    case ComparisonKind::slow_l1: return "slow_l1";
  }
  return "?";
}

inline ComparisonKind comparison_kind_from_string(const std::string& s) {
  for (auto k : {ComparisonKind::slow_pointwise, ComparisonKind::fast_pointwise,
                 ComparisonKind::boundary_pointwise, ComparisonKind::fast_l1, ComparisonKind::slow_l1}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown comparison kind '" + s + "'");
}

inline Regime required_regime(ComparisonKind k) {
  switch (k) {
    case ComparisonKind::slow_pointwise:
    case ComparisonKind::slow_l1: return Regime::slow;
    case ComparisonKind::boundary_pointwise: return Regime::boundary;
    default: return Regime::fast;
  }
}

struct LimitCompareConfig {
  Scenario scenario;
  ComparisonKind kind = ComparisonKind::slow_pointwise;
  std::int64_t n = 20000;
  std::size_t M = 2000;
  std::size_t limit_M = 50000;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double ks_tol = 0.10;
  std::size_t constants_M = 20000;  // Chernoff draws for slow_l1 constants

  void validate() const {
    scenario.validate();
    detail::require(n >= 1, "limit compare: n must be positive");
    detail::require(M >= 50, "limit compare: M must be at least 50");
    detail::require(limit_M >= 1, "limit compare: limit_M must be positive");
    const double T = scenario.law.T();
    detail::require(x0 > -T && x0 < T, "limit compare: x0 must be interior");
    detail::require(ks_tol > 0.0, "limit compare: ks_tol must be positive");
    const Regime want = required_regime(kind);
    const Regime got = regime_of(scenario.impact_exponent, scenario.beta());
    if (want != got) {
      throw InvalidArgument("limit compare: kind " + to_string(kind) + " needs the " + to_string(want) +
                            " regime but gamma = " + std::to_string(scenario.impact_exponent) + " is " +
                            to_string(got));
    }
  }
};

struct LimitCompareResult {
  ComparisonKind kind = ComparisonKind::slow_pointwise;
  std::int64_t n = 0;
  double gamma = 0.0;
  double ks = 0.0;
  std::vector<double> finite;  // standardized finite-sample statistics
  std::vector<double> limit;   // limit draws (empty for slow_l1)
  std::vector<std::pair<std::string, double>> constants;
  std::vector<Check> checks;
};

inline double normal_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }

inline LimitCompareResult run_limit_comparison(const LimitCompareConfig& cfg) {
  cfg.validate();
  const Scenario& scn = cfg.scenario;
  const double nd = static_cast<double>(cfg.n);
  const double delta = scn.delta(nd);
  const int beta = scn.beta();
  const double T = scn.law.T();
  LimitCompareResult out;
  out.kind = cfg.kind;
  out.n = cfg.n;
  out.gamma = scn.impact_exponent;
  out.finite.resize(cfg.M);

  const double truth_x0 = scn.phi_n(nd, cfg.x0);
  const double rate_slow = std::pow(nd / delta, beta / (2.0 * beta + 1.0));
  const double rate_fast = std::sqrt(nd);
  const std::uint32_t e = cell_id("limit_compare:" + to_string(cfg.kind), 0);
  parallel_for(cfg.M, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, e, static_cast<std::uint32_t>(r));
    const Sample s = sample_dataset(scn, cfg.n, rng);
    const StepEstimate fit = npmle_fit(s);
    auto target = [&](double x) { return scn.phi_n(nd, x); };
    switch (cfg.kind) {
      case ComparisonKind::slow_pointwise: out.finite[r] = rate_slow * (fit(cfg.x0) - truth_x0); break;
      case ComparisonKind::fast_pointwise:
      case ComparisonKind::boundary_pointwise: out.finite[r] = rate_fast * (fit(cfg.x0) - truth_x0); break;
      case ComparisonKind::fast_l1: out.finite[r] = rate_fast * l1_error_empirical(fit, target, s); break;
      case ComparisonKind::slow_l1:
        out.finite[r] = std::cbrt(nd / delta) * l1_error_lebesgue(fit, target, -T, T);
        break;
    }
  });

  LimitRequest req;
  req.link = scn.link;
  req.features = scn.law;
  req.x0 = cfg.x0;
  const std::uint64_t limit_seed = cfg.seed ^ 0xd1b54a32d192ed03ull;
  switch (cfg.kind) {
    case ComparisonKind::slow_pointwise:
      req.law = beta == 1 ? LimitLaw::scaled_chernoff : LimitLaw::slow_fbeta;
      break;
    case ComparisonKind::fast_pointwise: req.law = LimitLaw::fast_w_slope; break;
    case ComparisonKind::boundary_pointwise:
      req.law = LimitLaw::boundary_gbc;
      req.c = nd * std::pow(delta, 2.0 * beta);
      out.constants.emplace_back("c_finite_n", req.c);
      break;
    case ComparisonKind::fast_l1: req.law = LimitLaw::l1_fast_maxA; break;
    case ComparisonKind::slow_l1: {
      const auto am = chernoff_abs_mean(chernoff_grid(), cfg.constants_M, limit_seed, cfg.threads);
      const auto cov = chernoff_cov_integral(cov_grid(4.0), 4.0, 0.25, cfg.constants_M, limit_seed,
                                             cfg.threads);
      const double mu = mu_n(scn, nd, am.value);
      const double var = sigma_sq(scn.link, scn.law, cov.integral.value);
      detail::require(var > 0.0, "limit compare: estimated sigma^2 is not positive");
      const double fluct = std::pow(nd * delta * delta, 1.0 / 6.0);
      for (double& v : out.finite) v = fluct * (v - mu);
      out.constants = {{"abs_mean", am.value}, {"abs_mean_se", am.se}, {"cov_integral", cov.integral.value},
                       {"cov_integral_se", cov.integral.se}, {"mu_n", mu}, {"sigma_sq", var}};
      const double sd = std::sqrt(var);
      out.ks = ks_one_sample(out.finite, [&](double x) { return normal_cdf(x, sd); });
      out.checks.push_back(make_check("slow_l1 ks", out.ks, "<=", cfg.ks_tol));
      return out;
    }
  }
  const auto batch = simulate_limit(req, cfg.limit_M, limit_seed, cfg.threads);
  out.limit = batch.draws;
  for (const auto& p : batch.params) out.constants.push_back(p);
  out.ks = ks_two_sample(out.finite, out.limit);
  out.checks.push_back(make_check(to_string(cfg.kind) + " ks", out.ks, "<=", cfg.ks_tol));
  return out;
}

//==============================================================================
// Covariance of the partial-sum representation
//==============================================================================

/// A_n(u) = n^{-1/2} sum_i eps_i (1 - 2 1{F(x_i) <= u}) / sigma with
/// eps_i = y_i - Phi_n(x_i). Its covariance tends to 1 - 2|u - v|.
struct RepresentationConfig {
  Scenario scenario;
  std::int64_t n = 20000;
  std::size_t M = 50000;
  std::vector<double> us{0.1, 0.3, 0.5, 0.7, 0.9};
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double se_multiple = 3.0;

  void validate() const {
    scenario.validate();
    detail::require(n >= 1, "representation: n must be positive");
    detail::require(M >= 50, "representation: M must be at least 50");
    detail::require(!us.empty(), "representation: u grid must be nonempty");
    for (std::size_t i = 0; i < us.size(); ++i) {
      detail::require(us[i] > 0.0 && us[i] < 1.0, "representation: u values must lie in (0,1)");
      if (i > 0) detail::require(us[i] > us[i - 1], "representation: u grid must be increasing");
    }
    detail::require(se_multiple > 0.0, "representation: se_multiple must be positive");
  }
};

struct RepresentationCell {
  double u = 0.0;
  double v = 0.0;
  double target = 0.0;
  double cov = 0.0;
  double se = 0.0;
};

struct RepresentationResult {
  std::vector<RepresentationCell> cells;
  double worst_z = 0.0;  // max |cov - target| / se
  std::vector<Check> checks;
};

inline RepresentationResult run_representation_covariance(const RepresentationConfig& cfg) {
  cfg.validate();
  const Scenario& scn = cfg.scenario;
  const double nd = static_cast<double>(cfg.n);
  const double delta = scn.delta(nd);
  const double p0 = scn.link.value(0.0);
  const double sigma = std::sqrt(p0 * (1.0 - p0));
  detail::require(sigma > 0.0, "representation: Phi0(0) must lie in (0,1)");
  const std::size_t k = cfg.us.size();
  // values[j][r] = A_n(us[j]) in replicate r
  std::vector<std::vector<double>> values(k, std::vector<double>(cfg.M));
  const std::uint32_t e = cell_id("representation", 0);
  parallel_for(cfg.M, cfg.threads, [&](std::size_t r) {
    Rng rng(cfg.seed, e, static_cast<std::uint32_t>(r));
    // bins[j] sums eps over F(x) in (us[j-1], us[j]]; bins[k] holds the rest
    std::vector<double> bins(k + 1, 0.0);
    for (std::int64_t i = 0; i < cfg.n; ++i) {
      const double u = uniform01(rng);
      const double x = scn.law.quantile(u);
      const double p = scn.link.value(delta * x);
      const double eps = (uniform01(rng) < p ? 1.0 : 0.0) - p;
      const auto it = std::lower_bound(cfg.us.begin(), cfg.us.end(), u);
      bins[static_cast<std::size_t>(it - cfg.us.begin())] += eps;
    }
    double total = 0.0;
    for (double b : bins) total += b;
    double below = 0.0;
    const double scale = 1.0 / (sigma * std::sqrt(nd));
    for (std::size_t j = 0; j < k; ++j) {
      below += bins[j];
      values[j][r] = (total - 2.0 * below) * scale;
    }
  });
  RepresentationResult out;
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      const CovSe c = covariance(values[a], values[b]);
      RepresentationCell cell{cfg.us[a], cfg.us[b], 1.0 - 2.0 * std::abs(cfg.us[a] - cfg.us[b]), c.cov, c.se};
      detail::require(c.se > 0.0, "representation: degenerate covariance estimate");
      out.worst_z = std::max(out.worst_z, std::abs(cell.cov - cell.target) / cell.se);
      out.cells.push_back(cell);
    }
  }
  out.checks.push_back(make_check("representation covariance max |cov - (1-2|u-v|)| / se", out.worst_z, "<=",
                                  cfg.se_multiple));
  return out;
}

//==============================================================================
// Lower-bound audit
//==============================================================================

struct AuditConfig {
  FeatureLaw law = FeatureLaw::uniform();
  double x0 = 0.0;
  std::int64_t n_fast = 400;
  double delta_fast = 0.001;
  double C_fast = 0.4;
  std::int64_t n_slow = 10000;
  double delta_slow = 0.1;
  double C_slow = 0.0;  // 0 selects the default
  std::int64_t n_cube = 1000000;
  double delta_cube = 0.1;
  double C_cube = 0.0;  // 0 selects the default
  double quad_tol = 1e-8;

  void validate() const {
    detail::require(quad_tol > 0.0, "audit: quad_tol must be positive");
  }
};

struct AuditItem {
  std::string name;
  double n_d2 = 0.0;    // largest n d^2 found
  double alpha = 0.0;   // budget
  std::string inequality;
  bool membership = false;
};

struct AuditResult {
  std::vector<AuditItem> items;
  std::vector<Check> checks;
  HypothesisPair fast;
  HypothesisPair slow;
  HypothesisCube cube;
};

inline AuditResult run_lower_bound_audit(const AuditConfig& cfg) {
  cfg.validate();
  QuadratureCfg q;
  q.abs_tol = cfg.quad_tol;
  const double sup_p = cfg.law.sup_density();
  const double T = cfg.law.T();
  AuditResult out;

  auto member = [&](const PiecewiseAffine& f, double delta) { return check_membership(f, delta, T).ok(); };

  // Fast pair.
  out.fast = build_pointwise_hypotheses(cfg.delta_fast, cfg.n_fast, cfg.C_fast, cfg.law, cfg.x0);
  detail::require(out.fast.regime == PointwiseCase::fast, "audit: delta_fast must be below n_fast^{-1/2}");
  {
    AuditItem it;
    it.name = "pointwise_fast";
    it.alpha = 4.0 * cfg.C_fast * cfg.C_fast;
    it.inequality = "n d^2 <= 4C^2 = alpha < 2";
    it.n_d2 = static_cast<double>(cfg.n_fast) * std::pow(hellinger(out.fast.phi0, out.fast.phi1, cfg.law, q), 2);
    it.membership = member(out.fast.phi0, cfg.delta_fast) && member(out.fast.phi1, cfg.delta_fast);
    out.items.push_back(it);
    const double sep = 2.0 * cfg.C_fast / std::sqrt(static_cast<double>(cfg.n_fast));
    out.checks.push_back(make_check("fast pair separation error", std::abs(out.fast.separation() - sep), "<=", 1e-12));
  }

  // Slow pair.
  const double C_slow = cfg.C_slow > 0.0 ? cfg.C_slow : default_c_pointwise_slow(cfg.law);
  out.slow = build_pointwise_hypotheses(cfg.delta_slow, cfg.n_slow, C_slow, cfg.law, cfg.x0);
  detail::require(out.slow.regime == PointwiseCase::slow, "audit: delta_slow must be at least n_slow^{-1/2}");
  {
    AuditItem it;
    it.name = "pointwise_slow";
    it.alpha = 64.0 * C_slow * C_slow * C_slow * sup_p;
    it.inequality = "n d^2 <= 8^2 C^3 sup p_X = alpha < 2";
    it.n_d2 = static_cast<double>(cfg.n_slow) * std::pow(hellinger(out.slow.phi0, out.slow.phi1, cfg.law, q), 2);
    it.membership = member(out.slow.phi0, cfg.delta_slow) && member(out.slow.phi1, cfg.delta_slow);
    out.items.push_back(it);
    const double sep = 2.0 * C_slow * std::cbrt(cfg.delta_slow / static_cast<double>(cfg.n_slow));
    out.checks.push_back(make_check("slow pair separation error", std::abs(out.slow.separation() - sep), "<=", 1e-12));
  }

  // Assouad cube: every one-bit flip from the all-zero and the alternating vertex.
  const double C_cube = cfg.C_cube > 0.0 ? cfg.C_cube : default_c_assouad(cfg.law);
  detail::require(C_cube < c_bound_assouad(cfg.law), "audit: violated C < (1/(32 sup p))^{1/3} for the cube");
  out.cube = build_assouad_cube(cfg.delta_cube, cfg.n_cube, C_cube, T);
  {
    AuditItem it;
    it.name = "assouad_one_flip";
    it.alpha = 64.0 * C_cube * C_cube * C_cube * sup_p;
    it.inequality = "n d^2 <= 64 C^3 sup p_X = alpha < 2";
    it.membership = true;
    const std::size_t m = out.cube.m;
    const double nd = static_cast<double>(cfg.n_cube);
    const double l1_floor = out.cube.h * 2.0 * T * C_cube * std::cbrt(cfg.delta_cube / nd);
    double worst_l1_gap = std::numeric_limits<double>::infinity();
    double range_lo = 1.0;
    double range_hi = 0.0;
    for (int base = 0; base < 2; ++base) {
      std::vector<std::uint8_t> bits(m);
      for (std::size_t k = 0; k < m; ++k) bits[k] = base == 0 ? 0 : static_cast<std::uint8_t>(k % 2);
      const PiecewiseAffine f = out.cube.evaluate(bits);
      it.membership = it.membership && member(f, cfg.delta_cube);
      range_lo = std::min(range_lo, f(-T));
      range_hi = std::max(range_hi, f(T));
      for (std::size_t k = 0; k < m; ++k) {
        auto flipped = bits;
        flipped[k] ^= 1;
        const PiecewiseAffine g = out.cube.evaluate(flipped);
        it.n_d2 = std::max(it.n_d2, nd * std::pow(hellinger(f, g, cfg.law, q), 2));
        const double a = out.cube.grid[k];
        const double b = out.cube.grid[k + 1];
        std::vector<double> cuts{a + out.cube.h};
        const double gap = detail::integrate_pieces(
            [&](double x, double, double) { return std::abs(f(x) - g(x)); }, a, b, cuts, q);
        worst_l1_gap = std::min(worst_l1_gap, gap);
      }
    }
    out.items.push_back(it);
    out.checks.push_back(make_check("cube cell L1 gap minus h 2TC(n/delta)^{-1/3}", worst_l1_gap - l1_floor, ">=",
                                    -cfg.quad_tol));
    out.checks.push_back(make_check("cube minimum value", range_lo, ">=", 0.25));
    out.checks.push_back(make_check("cube maximum value", range_hi, "<=", 0.75));
  }

  for (const auto& it : out.items) {
    out.checks.push_back(make_check(it.name + " n d^2 minus alpha", it.n_d2 - it.alpha, "<=", cfg.quad_tol));
    out.checks.push_back(make_check(it.name + " alpha", it.alpha, "<", 2.0));
    out.checks.push_back(make_check(it.name + " membership", it.membership ? 1.0 : 0.0, ">=", 1.0));
  }
  return out;
}

//==============================================================================
// Tail-bound probe for the inverse process
//==============================================================================

struct TailProbeConfig {
  Scenario scenario;
  std::vector<std::int64_t> n_list{1024, 2048, 4096, 8192, 16384, 32768, 65536};
  std::vector<double> x_list{0.02, 0.05, 0.1};
  std::size_t M = 400;
  double x0 = 0.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double slope_tol = 0.1;

  void validate() const {
    scenario.validate();
    detail::require(n_list.size() >= 3, "tail probe: need at least 3 sample sizes");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
      detail::require(n_list[i] > n_list[i - 1], "tail probe: n_list must be increasing");
    }
    detail::require(M >= 50, "tail probe: M must be at least 50");
    const double T = scenario.law.T();
    detail::require(x0 > -T && x0 < T, "tail probe: x0 must be interior");
    detail::require(regime_of(scenario.impact_exponent, scenario.beta()) == Regime::slow,
                    "tail probe: scenario must be in the slow regime");
    for (double x : x_list) detail::require(x > 0.0, "tail probe: x values must be positive");
  }
};

struct TailCell {
  std::int64_t n = 0;
  double x = 0.0;
  double scale = 0.0;      // n delta_n^2 x^3
  double frequency = 0.0;  // P(|U_n(a) - lambda_n^{-1}(a)| >= x)
};

struct TailProbeResult {
  std::vector<std::vector<double>> deviations;  // [n index][replicate]
  std::vector<double> medians;
  std::vector<TailCell> cells;
  SlopeFit slope;
  double target_slope = 0.0;
  bool frequencies_monotone = true;
  std::vector<Check> checks;
};

inline TailProbeResult run_tail_bound_probe(const TailProbeConfig& cfg) {
  cfg.validate();
  const Scenario& scn = cfg.scenario;
  TailProbeResult out;
  out.deviations.resize(cfg.n_list.size());
  std::vector<double> ns;
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const std::int64_t n = cfg.n_list[ni];
    const double nd = static_cast<double>(n);
    const double a = scn.phi_n(nd, cfg.x0);
    const double lam = lambda_inverse(scn, nd, a);
    const std::uint32_t e = cell_id("tail_probe", ni);
    auto& dev = out.deviations[ni];
    dev.resize(cfg.M);
    parallel_for(cfg.M, cfg.threads, [&](std::size_t r) {
      Rng rng(cfg.seed, e, static_cast<std::uint32_t>(r));
      const Sample s = sample_dataset(scn, n, rng);
      dev[r] = std::abs(inverse_process(s, a).grid_t - lam);
    });
    out.medians.push_back(median(dev));
    ns.push_back(nd);
    const double d = scn.delta(nd);
    for (double x : cfg.x_list) {
      TailCell c;
      c.n = n;
      c.x = x;
      c.scale = nd * d * d * x * x * x;
      c.frequency = static_cast<double>(std::count_if(dev.begin(), dev.end(), [&](double v) { return v >= x; })) /
                    static_cast<double>(cfg.M);
      out.cells.push_back(c);
    }
  }
  // Along each fixed x the scale grows with n; frequencies should not rise.
  for (std::size_t xi = 0; xi < cfg.x_list.size(); ++xi) {
    for (std::size_t ni = 1; ni < cfg.n_list.size(); ++ni) {
      const auto& prev = out.cells[(ni - 1) * cfg.x_list.size() + xi];
      const auto& cur = out.cells[ni * cfg.x_list.size() + xi];
      if (cur.frequency > prev.frequency) out.frequencies_monotone = false;
    }
  }
  std::vector<double> med = out.medians;
  for (double& m : med) m = std::max(m, 1e-300);
  out.slope = fit_loglog_slope(ns, med);
  out.target_slope = -(1.0 - 2.0 * scn.impact_exponent) / 3.0;
  out.checks.push_back(
      make_check("inverse-process slope deviation", std::abs(out.slope.slope - out.target_slope), "<=", cfg.slope_tol));
  return out;
}

//==============================================================================
// Consistency study
//==============================================================================

struct ConsistencyConfig {
  Scenario scenario;
  std::vector<double> hellinger_gammas{0.0};
  std::vector<double> sup_gammas{0.25, 0.8};
  std::vector<std::int64_t> n_list{400, 800, 1600, 3200, 6400};
  std::size_t M = 200;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double hellinger_ratio_tol = 0.55;

  void validate() const {
    scenario.validate();
    detail::require(n_list.size() >= 2, "consistency: need at least 2 sample sizes");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
      detail::require(n_list[i] > n_list[i - 1], "consistency: n_list must be increasing");
    }
    detail::require(M >= 50, "consistency: M must be at least 50");
  }
};

struct ConsistencyResult {
  // [gamma index][n index] medians
  std::vector<std::vector<double>> hellinger_medians;
  std::vector<std::vector<double>> sup_medians;
  std::vector<Check> checks;
};

inline ConsistencyResult run_consistency_study(const ConsistencyConfig& cfg) {
  cfg.validate();
  ConsistencyResult out;
  const double T = cfg.scenario.law.T();
  auto run = [&](double gamma, std::size_t gi, bool hell) {
    Scenario scn = cfg.scenario;
    scn.impact_exponent = gamma;
    std::vector<double> meds;
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
      const std::int64_t n = cfg.n_list[ni];
      const double nd = static_cast<double>(n);
      const std::uint32_t e = cell_id(hell ? "consistency_hellinger" : "consistency_sup", gi, ni);
      std::vector<double> v(cfg.M);
      parallel_for(cfg.M, cfg.threads, [&](std::size_t r) {
        Rng rng(cfg.seed, e, static_cast<std::uint32_t>(r));
        const Sample s = sample_dataset(scn, n, rng);
        const StepEstimate fit = npmle_fit(s);
        auto target = [&](double x) { return scn.phi_n(nd, x); };
        v[r] = hell ? hellinger(fit, target, scn.law) : sup_norm_on(fit, target, -0.5 * T, 0.5 * T);
      });
      meds.push_back(median(v));
    }
    return meds;
  };
  for (std::size_t gi = 0; gi < cfg.hellinger_gammas.size(); ++gi) {
    out.hellinger_medians.push_back(run(cfg.hellinger_gammas[gi], gi, true));
    const auto& m = out.hellinger_medians.back();
    out.checks.push_back(make_check("hellinger median ratio gamma=" + std::to_string(cfg.hellinger_gammas[gi]),
                                    m.back() / m.front(), "<=", cfg.hellinger_ratio_tol));
  }
  for (std::size_t gi = 0; gi < cfg.sup_gammas.size(); ++gi) {
    out.sup_medians.push_back(run(cfg.sup_gammas[gi], gi, false));
    const auto& m = out.sup_medians.back();
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < m.size(); ++i) worst = std::max(worst, m[i] - m[i - 1]);
    out.checks.push_back(
        make_check("sup-norm median largest increment gamma=" + std::to_string(cfg.sup_gammas[gi]), worst, "<", 0.0));
  }
  return out;
}

//==============================================================================
// Constants
//==============================================================================

struct ConstantsConfig {
  Scenario scenario;
  std::int64_t n = 40000;
  std::size_t abs_mean_M = 20000;
  std::size_t cov_M = 20000;
  double a_max = 4.0;
  double a_step = 0.25;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct ConstantsResult {
  Estimate abs_mean;
  CovIntegral cov;
  double mu = 0.0;
  double sigma2 = 0.0;
  double kappa = 0.0;
};

inline ConstantsResult run_constants(const ConstantsConfig& cfg) {
  cfg.scenario.validate();
  ConstantsResult out;
  out.abs_mean = chernoff_abs_mean(chernoff_grid(), cfg.abs_mean_M, cfg.seed, cfg.threads);
  out.cov = chernoff_cov_integral(cov_grid(cfg.a_max), cfg.a_max, cfg.a_step, cfg.cov_M, cfg.seed, cfg.threads);
  out.mu = mu_n(cfg.scenario, static_cast<double>(cfg.n), out.abs_mean.value);
  out.sigma2 = sigma_sq(cfg.scenario.link, cfg.scenario.law, out.cov.integral.value);
  out.kappa = scaled_chernoff_constant(cfg.scenario.link, cfg.scenario.law, 0.0);
  return out;
}

}  // namespace wfi
