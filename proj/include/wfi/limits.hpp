#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "convex.hpp"
#include "error.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "rng.hpp"

namespace wfi {

//==============================================================================
// Grids and Brownian paths
//==============================================================================

/// Uniform grid on [-S, S] (two-sided) or [0, S] (one-sided) with step h.
struct PathGrid {
  double S = 4.0;
  double h = 0.002;
  bool two_sided = true;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(S / h)); }
  std::size_t size() const { return two_sided ? 2 * steps() + 1 : steps() + 1; }
  std::size_t origin() const { return two_sided ? steps() : 0; }
  double at(std::size_t i) const {
    return (static_cast<double>(i) - static_cast<double>(origin())) * h;
  }

  void validate() const {
    detail::require(S > 0.0 && h > 0.0, "grid: S and h must be positive");
    detail::require(std::abs(S / h - std::round(S / h)) <= 1e-9 * (S / h), "grid: S/h must be integral");
    detail::require(h <= 0.01 * S * (1.0 + 1e-12), "grid: h must be at most 0.01 S");
  }

  PathGrid doubled() const { return {2.0 * S, h, two_sided}; }
};

/// Default two-sided grid for Chernoff-type functionals at natural scale
/// `scale`: S = 4 scale, h = 0.002 scale.
inline PathGrid chernoff_grid(double scale = 1.0) { return {4.0 * scale, 0.002 * scale, true}; }

/// Two-sided grid wide enough for X(a), 0 <= a <= a_max.
inline PathGrid cov_grid(double a_max) { return {4.0 + a_max, 0.002, true}; }

/// Default one-sided grid on [0, 1].
inline PathGrid unit_grid(double h = 2e-4) {
  PathGrid g{1.0, h, false};
  g.h = 1.0 / static_cast<double>(g.steps());
  return g;
}

/// Standard Brownian motion on the grid. Z(0) = 0; the two-sided version
/// joins two independent one-sided paths (right side drawn first).
inline std::vector<double> brownian_path(const PathGrid& grid, Rng& rng) {
  grid.validate();
  NormalSource normal;
  const std::size_t N = grid.steps();
  const std::size_t o = grid.origin();
  const double sd = std::sqrt(grid.h);
  std::vector<double> z(grid.size(), 0.0);
  for (std::size_t i = 1; i <= N; ++i) z[o + i] = z[o + i - 1] + sd * normal(rng);
  if (grid.two_sided) {
    for (std::size_t i = 1; i <= N; ++i) z[o - i] = z[o - i + 1] + sd * normal(rng);
  }
  return z;
}

inline std::vector<double> brownian_path(const PathGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  return brownian_path(grid, rng);
}

//==============================================================================
// Argmin functionals
//==============================================================================

namespace detail {

constexpr int kMaxDoublings = 3;

inline bool in_outer_band(const PathGrid& g, double s) { return std::abs(s) > 0.9 * g.S; }

[[noreturn]] inline void grid_escape(const std::string& who) {
  throw NumericalError(who + ": minimiser stayed in the outer 10% of the grid after " +
                       std::to_string(kMaxDoublings) + " doublings; enlarge the grid");
}

}  // namespace detail

/// Grid argmin of a Z(s) + b s^2 - c s over a stored two-sided path
/// (ties to the largest s).
inline double argmin_on_path(const std::vector<double>& z, const PathGrid& grid, double a, double b,
                             double c) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = grid.at(i);
    const double v = a * z[i] + b * s * s - c * s;
    if (v <= best) {
      best = v;
      arg = i;
    }
  }
  return grid.at(arg);
}

/// One draw of argmin_s { a Z(s) + b s^2 - c s } on the two-sided grid,
/// streaming the path without storing it. If the minimiser lands in the
/// outer 10% of [-S, S], a fresh path is drawn on a doubled S.
inline double argmin_drifted(double a, double b, double c, PathGrid grid, Rng& rng) {
  detail::require(b > 0.0, "argmin_drifted: b must be positive");
  detail::require(grid.two_sided, "argmin_drifted: grid must be two-sided");
  grid.validate();
  NormalSource normal;
  for (int attempt = 0; attempt <= detail::kMaxDoublings; ++attempt) {
    const std::size_t N = grid.steps();
    const double sd = std::sqrt(grid.h);
    // Left side walked outward (decreasing s): ties keep the larger s, so
    // only strict improvements replace the incumbent.
    double best = std::numeric_limits<double>::infinity();
    double arg = 0.0;
    double z = 0.0;
    for (std::size_t i = 1; i <= N; ++i) {
      z += sd * normal(rng);
      const double s = -static_cast<double>(i) * grid.h;
      const double v = a * z + b * s * s - c * s;
      if (v < best) {
        best = v;
        arg = s;
      }
    }
    if (0.0 <= best) {
      best = 0.0;
      arg = 0.0;
    }
    z = 0.0;
    for (std::size_t i = 1; i <= N; ++i) {
      z += sd * normal(rng);
      const double s = static_cast<double>(i) * grid.h;
      const double v = a * z + b * s * s - c * s;
      if (v <= best) {
        best = v;
        arg = s;
      }
    }
    if (!detail::in_outer_band(grid, arg)) return arg;
    grid = grid.doubled();
  }
  detail::grid_escape("argmin_drifted");
}

/// Grid whose width and step follow the natural scale (a/b)^{2/3} of
/// argmin { a Z + b s^2 - c s } and that also covers the shift c / (2b).
inline PathGrid drifted_grid(double a, double b, double c) {
  const double scale = std::pow(a / b, 2.0 / 3.0);
  const double h = 0.002 * scale;
  const double shift = std::abs(c) / (2.0 * b);
  const double steps = 2000.0 + std::ceil(shift / h);
  return {steps * h, h, true};
}

/// Chernoff draw: argmin_s { Z(s) + s^2 }.
inline double chernoff_sample(const PathGrid& grid, Rng& rng) { return argmin_drifted(1.0, 1.0, 0.0, grid, rng); }

inline double chernoff_sample(const PathGrid& grid, std::uint64_t seed) {
  Rng rng(seed);
  return chernoff_sample(grid, rng);
}

/// Chernoff functional of an injected path: argmin_s { z(s) + s^2 }.
inline double chernoff_on_path(const std::vector<double>& z, const PathGrid& grid) {
  return argmin_on_path(z, grid, 1.0, 1.0, 0.0);
}

/// kappa = (4 sigma^2 Phi0'(0) / p_X(x0))^{1/3}; the slow-regime pointwise
/// limit for beta = 1 is kappa times a Chernoff variable.
inline double scaled_chernoff_constant(const LinkSpec& link, const FeatureLaw& law, double x0) {
  const double d1 = link.derivative(0.0, 1);
  if (!(d1 > 0.0)) {
    throw InvalidArgument("scaled_chernoff_constant: Phi0'(0) = 0; use slow_limit_sample for beta > 1");
  }
  const double p = law.density(x0);
  detail::require(p > 0.0, "scaled_chernoff_constant: density at x0 must be positive");
  const double s2 = link.sigma() * link.sigma();
  return std::cbrt(4.0 * s2 * d1 / p);
}

//==============================================================================
// GCM-based samplers
//==============================================================================

namespace detail {

// Left derivative at grid index idx of the GCM of ys, plus the hull
// segment end points (as grid indices).
struct SlopeAt {
  double slope;
  std::size_t left;
  std::size_t right;
};

inline SlopeAt gcm_slope_at(const std::vector<double>& ys, double h, std::size_t idx) {
  const auto hull = lower_hull_uniform(ys);
  const std::size_t k = hull_segment_containing(hull, idx);
  const std::size_t a = hull[k - 1];
  const std::size_t b = hull[k];
  return {(ys[b] - ys[a]) / (static_cast<double>(b - a) * h), a, b};
}

inline double ipow(double x, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= x;
  return r;
}

inline double factorial(int k) {
  double r = 1.0;
  for (int j = 2; j <= k; ++j) r *= j;
  return r;
}

}  // namespace detail

/// Drift coefficient of f_beta: Phi0^{(beta)}(0) / (p_X(x0)^beta (beta+1)!).
inline double fbeta_drift_coefficient(const LinkSpec& link, const FeatureLaw& law, double x0) {
  const int beta = link.beta;
  return link.leading_derivative() / (std::pow(law.density(x0), beta) * detail::factorial(beta + 1));
}

/// Natural scale of f_beta: where sigma sqrt(s) meets the drift.
inline PathGrid fbeta_grid(const LinkSpec& link, const FeatureLaw& law, double x0) {
  const double b = fbeta_drift_coefficient(link, law, x0);
  const double sigma = link.sigma();
  const double scale = std::pow(sigma / b, 2.0 / (2.0 * link.beta + 1.0));
  return chernoff_grid(scale);
}

/// Left derivative at 0 of the GCM of sigma_scale * Z(s) + coef * s^{beta+1}
/// for an injected path z on a two-sided grid.
inline double fbeta_slope_on_path(const std::vector<double>& z, const PathGrid& grid, double sigma,
                                  double coef, int beta) {
  std::vector<double> ys(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = grid.at(i);
    ys[i] = sigma * z[i] + coef * detail::ipow(s, beta + 1);
  }
  return detail::gcm_slope_at(ys, grid.h, grid.origin()).slope;
}

/// One draw of f_beta^{*,l}(0).
inline double slow_limit_sample(int beta, const LinkSpec& link, const FeatureLaw& law, double x0,
                                PathGrid grid, Rng& rng) {
  detail::require(beta == link.beta, "slow_limit_sample: beta must match the link's flatness order");
  detail::require(beta % 2 == 1, "slow_limit_sample: beta must be odd for a convex drift");
  detail::require(grid.two_sided, "slow_limit_sample: grid must be two-sided");
  const double sigma = link.sigma();
  const double coef = fbeta_drift_coefficient(link, law, x0);
  for (int attempt = 0; attempt <= detail::kMaxDoublings; ++attempt) {
    const auto z = brownian_path(grid, rng);
    std::vector<double> ys(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = grid.at(i);
      ys[i] = sigma * z[i] + coef * detail::ipow(s, beta + 1);
    }
    const auto r = detail::gcm_slope_at(ys, grid.h, grid.origin());
    if (!detail::in_outer_band(grid, grid.at(r.left)) && !detail::in_outer_band(grid, grid.at(r.right))) {
      return r.slope;
    }
    grid = grid.doubled();
  }
  detail::grid_escape("slow_limit_sample");
}

/// sqrt(c) Phi0^{(beta)}(0) int_{-T}^{F^{-1}(s)} (x - x0)^beta p_X(x) dx.
inline double boundary_drift(int beta, double c, const LinkSpec& link, const FeatureLaw& law, double x0,
                             double s, const QuadratureCfg& q = {}) {
  detail::require(c >= 0.0, "boundary_drift: c must be nonnegative");
  detail::require(s >= 0.0 && s <= 1.0, "boundary_drift: s must lie in [0,1]");
  if (s == 0.0 || c == 0.0) return 0.0;
  const double upper = law.quantile(s);
  const double integral =
      integrate([&](double x) { return std::pow(x - x0, beta) * law.density(x); }, -law.T(), upper, q);
  return std::sqrt(c) * link.derivative(0.0, beta) * integral;
}

/// Drift of g_{beta,c} tabulated on a one-sided [0,1] grid, accumulated
/// piece by piece between consecutive quantiles.
inline std::vector<double> boundary_drift_table(int beta, double c, const LinkSpec& link,
                                                const FeatureLaw& law, double x0, const PathGrid& grid,
                                                const QuadratureCfg& q = {}) {
  std::vector<double> out(grid.size(), 0.0);
  if (c == 0.0) return out;
  const double scale = std::sqrt(c) * link.derivative(0.0, beta);
  auto f = [&](double x) { return std::pow(x - x0, beta) * law.density(x); };
  double acc = 0.0;
  double prev = -law.T();
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double s = std::min(1.0, grid.at(i));
    const double x = law.quantile(s);
    acc += integrate(f, prev, x, q);
    prev = x;
    out[i] = scale * acc;
  }
  return out;
}

namespace detail {

inline std::size_t unit_index(const PathGrid& grid, double t) {
  const auto N = grid.steps();
  auto i = static_cast<std::size_t>(std::ceil(t / grid.h - 1e-9));
  return std::clamp<std::size_t>(i, 1, N);
}

}  // namespace detail

/// Left derivative at F_X(x0) of the GCM of sigma W + drift on [0, 1],
/// with an injected path and a precomputed drift table.
inline double boundary_slope_on_path(const std::vector<double>& w, const std::vector<double>& drift,
                                     const PathGrid& grid, double sigma, double t0) {
  std::vector<double> ys(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) ys[i] = sigma * w[i] + drift[i];
  return detail::gcm_slope_at(ys, grid.h, detail::unit_index(grid, t0)).slope;
}

inline double boundary_limit_sample(const LinkSpec& link, const FeatureLaw& law, double x0,
                                    const std::vector<double>& drift, const PathGrid& grid, Rng& rng) {
  const double t0 = law.cdf(x0);
  if (!(t0 > 0.0 && t0 < 1.0)) throw InvalidArgument("x0 must be interior");
  const auto w = brownian_path(grid, rng);
  return boundary_slope_on_path(w, drift, grid, link.sigma(), t0);
}

/// One draw of g_{beta,c}^{*,l}(F_X(x0)); c = 0 gives the fast-regime law.
inline double boundary_limit_sample(int beta, double c, const LinkSpec& link, const FeatureLaw& law,
                                    double x0, const PathGrid& grid, Rng& rng) {
  detail::require(!grid.two_sided, "boundary_limit_sample: grid must be one-sided on [0,1]");
  const double t0 = law.cdf(x0);
  if (!(t0 > 0.0 && t0 < 1.0)) throw InvalidArgument("x0 must be interior");
  const auto drift = boundary_drift_table(beta, c, link, law, x0, grid);
  return boundary_limit_sample(link, law, x0, drift, grid, rng);
}

/// sigma (W(1) - 2 min_u W(u)) for an injected path on [0,1].
inline double l1_fast_on_path(const std::vector<double>& w, double sigma) {
  const double lo = std::min(0.0, *std::min_element(w.begin(), w.end()));
  return sigma * (w.back() - 2.0 * lo);
}

/// One draw of max_s A(s) for the fast-regime L1 limit.
inline double l1_fast_limit_sample(const LinkSpec& link, const PathGrid& grid, Rng& rng) {
  detail::require(!grid.two_sided, "l1_fast_limit_sample: grid must be one-sided on [0,1]");
  const auto w = brownian_path(grid, rng);
  return l1_fast_on_path(w, link.sigma());
}

//==============================================================================
// Monte Carlo constants
//==============================================================================

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

/// Monte Carlo mean of |X(0)| over M Chernoff draws.
inline Estimate chernoff_abs_mean(const PathGrid& grid, std::size_t M, std::uint64_t seed,
                                  unsigned threads = 1) {
  detail::require(M >= 2, "chernoff_abs_mean: M must be at least 2");
  const std::uint32_t e = experiment_id("chernoff_abs_mean");
  std::vector<double> v(M);
  parallel_for(M, threads, [&](std::size_t i) {
    Rng rng(seed, e, static_cast<std::uint32_t>(i));
    v[i] = std::abs(chernoff_sample(grid, rng));
  });
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(M);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(M - 1));
  return {mean, sd / std::sqrt(static_cast<double>(M))};
}

/// X(a) = argmin_s { Z(s) + (s - a)^2 } for every a in `as`, from one
/// stored path. The minimiser for slope 2a is the hull vertex of Z + s^2
/// whose incoming slope is <= 2a and outgoing slope > 2a (largest minimiser).
inline std::vector<double> argmin_family_on_path(const std::vector<double>& z, const PathGrid& grid,
                                                 const std::vector<double>& as) {
  std::vector<double> ys(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = grid.at(i);
    ys[i] = z[i] + s * s;
  }
  const auto hull = lower_hull_uniform(ys);
  std::vector<double> slopes(hull.size() - 1);
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    slopes[k] = (ys[hull[k + 1]] - ys[hull[k]]) / (static_cast<double>(hull[k + 1] - hull[k]) * grid.h);
  }
  std::vector<double> out(as.size());
  for (std::size_t j = 0; j < as.size(); ++j) {
    // number of segments with slope <= 2a is the index of the vertex.
    const auto it = std::upper_bound(slopes.begin(), slopes.end(), 2.0 * as[j]);
    out[j] = grid.at(hull[static_cast<std::size_t>(it - slopes.begin())]);
  }
  return out;
}

struct CovIntegral {
  Estimate integral;
  std::vector<double> as;
  std::vector<double> cov;     // empirical Cov(|X(0)|, |X(a) - a|)
  std::vector<double> cov_se;  // per-a standard error
};

namespace detail {

inline double cov_trapezoid(const std::vector<std::vector<double>>& shifted, const std::vector<double>& as,
                            const std::vector<std::size_t>& idx, std::vector<double>* curve = nullptr) {
  const std::size_t A = as.size();
  const double M = static_cast<double>(idx.size());
  std::vector<double> c(A);
  for (std::size_t j = 0; j < A; ++j) {
    double m0 = 0.0;
    double mj = 0.0;
    for (std::size_t i : idx) {
      m0 += shifted[i][0];
      mj += shifted[i][j];
    }
    m0 /= M;
    mj /= M;
    double s = 0.0;
    for (std::size_t i : idx) s += (shifted[i][0] - m0) * (shifted[i][j] - mj);
    c[j] = s / (M - 1.0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j < A; ++j) total += 0.5 * (c[j] + c[j - 1]) * (as[j] - as[j - 1]);
  if (curve) *curve = std::move(c);
  return total;
}

}  // namespace detail

/// Trapezoid estimate of int_0^{a_max} Cov(|X(0)|, |X(a) - a|) da with a
/// bootstrap standard error over paths.
inline CovIntegral chernoff_cov_integral(const PathGrid& grid, double a_max, double a_step, std::size_t M,
                                         std::uint64_t seed, unsigned threads = 1, std::size_t bootstrap = 200) {
  detail::require(a_max >= 3.0, "chernoff_cov_integral: a_max must be at least 3");
  detail::require(a_step > 0.0 && a_step <= 0.25, "chernoff_cov_integral: a_step must lie in (0, 0.25]");
  detail::require(M >= 10, "chernoff_cov_integral: M must be at least 10");
  detail::require(grid.two_sided, "chernoff_cov_integral: grid must be two-sided");
  CovIntegral out;
  const auto A = static_cast<std::size_t>(std::llround(a_max / a_step));
  for (std::size_t j = 0; j <= A; ++j) out.as.push_back(static_cast<double>(j) * a_step);

  const std::uint32_t e = experiment_id("chernoff_cov_integral");
  std::vector<std::vector<double>> shifted(M);
  parallel_for(M, threads, [&](std::size_t i) {
    Rng rng(seed, e, static_cast<std::uint32_t>(i));
    PathGrid g = grid;
    for (int attempt = 0;; ++attempt) {
      const auto z = brownian_path(g, rng);
      const auto xs = argmin_family_on_path(z, g, out.as);
      bool escaped = false;
      for (double x : xs) escaped = escaped || detail::in_outer_band(g, x);
      if (!escaped) {
        shifted[i].resize(xs.size());
        for (std::size_t j = 0; j < xs.size(); ++j) shifted[i][j] = std::abs(xs[j] - out.as[j]);
        return;
      }
      if (attempt == detail::kMaxDoublings) detail::grid_escape("chernoff_cov_integral");
      g = g.doubled();
    }
  });

  std::vector<std::size_t> all(M);
  for (std::size_t i = 0; i < M; ++i) all[i] = i;
  out.integral.value = detail::cov_trapezoid(shifted, out.as, all, &out.cov);

  // Per-a standard error of the covariance from the centred products.
  out.cov_se.resize(out.as.size());
  for (std::size_t j = 0; j < out.as.size(); ++j) {
    double m0 = 0.0;
    double mj = 0.0;
    for (const auto& r : shifted) {
      m0 += r[0];
      mj += r[j];
    }
    m0 /= static_cast<double>(M);
    mj /= static_cast<double>(M);
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& r : shifted) {
      const double p = (r[0] - m0) * (r[j] - mj);
      s1 += p;
      s2 += p * p;
    }
    const double mp = s1 / static_cast<double>(M);
    const double var = s2 / static_cast<double>(M) - mp * mp;
    out.cov_se[j] = std::sqrt(std::max(var, 0.0) / static_cast<double>(M));
  }

  Rng boot(seed, experiment_id("chernoff_cov_bootstrap"), 0);
  std::vector<double> reps(bootstrap);
  std::vector<std::size_t> idx(M);
  for (std::size_t b = 0; b < bootstrap; ++b) {
    for (auto& k : idx) k = static_cast<std::size_t>(uniform01(boot) * static_cast<double>(M));
    reps[b] = detail::cov_trapezoid(shifted, out.as, idx);
  }
  double mean = 0.0;
  for (double r : reps) mean += r;
  mean /= static_cast<double>(bootstrap);
  double ss = 0.0;
  for (double r : reps) ss += (r - mean) * (r - mean);
  out.integral.se = bootstrap > 1 ? std::sqrt(ss / static_cast<double>(bootstrap - 1)) : 0.0;
  return out;
}

/// mu_n = E|X(0)| int_{-T}^{T} (4 Phi_n (1 - Phi_n) Phi0'(delta_n t) / p_X(t))^{1/3} dt.
inline double mu_n(const Scenario& scn, double n, double abs_mean, const QuadratureCfg& q = {}) {
  const double d = scn.delta(n);
  detail::require(scn.link.derivative(0.0, 1) > 0.0, "mu_n: Phi0'(0) must be positive");
  auto f = [&](double t) {
    const double p = scn.link.value(d * t);
    return std::cbrt(4.0 * p * (1.0 - p) * scn.link.derivative(d * t, 1) / scn.law.density(t));
  };
  return abs_mean * integrate(f, -scn.law.T(), scn.law.T(), q);
}

/// sigma^2 = 8 C int_{-T}^{T} Phi0(0)(1 - Phi0(0)) / p_X(t) dt.
inline double sigma_sq(const LinkSpec& link, const FeatureLaw& law, double cov_integral,
                       const QuadratureCfg& q = {}) {
  const double s2 = link.sigma() * link.sigma();
  return 8.0 * cov_integral * integrate([&](double t) { return s2 / law.density(t); }, -law.T(), law.T(), q);
}

//==============================================================================
// Batches
//==============================================================================

enum class LimitLaw { scaled_chernoff, slow_fbeta, boundary_gbc, fast_w_slope, l1_fast_maxA };

inline std::string to_string(LimitLaw k) {
  switch (k) {
    case LimitLaw::scaled_chernoff: return "scaled_chernoff";
    case LimitLaw::slow_fbeta: return "slow_fbeta";
    case LimitLaw::boundary_gbc: return "boundary_gbc";
    case LimitLaw::fast_w_slope: return "fast_w_slope";
    case LimitLaw::l1_fast_maxA: return "l1_fast_maxA";
  }
  return "?";
}

inline LimitLaw limit_law_from_string(const std::string& s) {
  for (auto k : {LimitLaw::scaled_chernoff, LimitLaw::slow_fbeta, LimitLaw::boundary_gbc,
                 LimitLaw::fast_w_slope, LimitLaw::l1_fast_maxA}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown limit law '" + s + "'");
}

struct LimitRequest {
  LimitLaw law = LimitLaw::scaled_chernoff;
  LinkSpec link = LinkSpec::logistic();
  FeatureLaw features = FeatureLaw::uniform();
  double x0 = 0.0;
  double c = 0.0;  // boundary constant for boundary_gbc
};

struct LimitBatch {
  LimitLaw law_tag = LimitLaw::scaled_chernoff;
  std::vector<double> draws;
  PathGrid grid;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;
};

/// Default grid for a request.
inline PathGrid default_grid(const LimitRequest& r) {
  switch (r.law) {
    case LimitLaw::scaled_chernoff: return chernoff_grid();
    case LimitLaw::slow_fbeta: return fbeta_grid(r.link, r.features, r.x0);
    default: return unit_grid();
  }
}

/// M independent draws; draw i uses stream (law id, i) of `seed`.
inline LimitBatch simulate_limit(const LimitRequest& r, std::size_t M, std::uint64_t seed, unsigned threads,
                                 const PathGrid& grid) {
  detail::require(M >= 1, "simulate_limit: M must be positive");
  r.link.validate();
  grid.validate();
  LimitBatch b;
  b.law_tag = r.law;
  b.grid = grid;
  b.seed = seed;
  b.draws.assign(M, 0.0);
  const std::uint32_t e = experiment_id(to_string(r.law));
  const double sigma = r.link.sigma();
  b.params = {{"x0", r.x0}, {"beta", static_cast<double>(r.link.beta)}, {"sigma", sigma}};

  switch (r.law) {
    case LimitLaw::scaled_chernoff: {
      detail::require(grid.two_sided, "simulate_limit: scaled_chernoff needs a two-sided grid");
      const double kappa = scaled_chernoff_constant(r.link, r.features, r.x0);
      b.params.emplace_back("kappa", kappa);
      parallel_for(M, threads, [&](std::size_t i) {
        Rng rng(seed, e, static_cast<std::uint32_t>(i));
        b.draws[i] = kappa * chernoff_sample(grid, rng);
      });
      break;
    }
    case LimitLaw::slow_fbeta: {
      detail::require(grid.two_sided, "simulate_limit: slow_fbeta needs a two-sided grid");
      b.params.emplace_back("drift_coefficient", fbeta_drift_coefficient(r.link, r.features, r.x0));
      parallel_for(M, threads, [&](std::size_t i) {
        Rng rng(seed, e, static_cast<std::uint32_t>(i));
        b.draws[i] = slow_limit_sample(r.link.beta, r.link, r.features, r.x0, grid, rng);
      });
      break;
    }
    case LimitLaw::boundary_gbc:
    case LimitLaw::fast_w_slope: {
      detail::require(!grid.two_sided, "simulate_limit: this law needs a one-sided [0,1] grid");
      const double c = r.law == LimitLaw::fast_w_slope ? 0.0 : r.c;
      detail::require(c >= 0.0, "simulate_limit: c must be nonnegative");
      const double t0 = r.features.cdf(r.x0);
      if (!(t0 > 0.0 && t0 < 1.0)) throw InvalidArgument("x0 must be interior");
      b.params.emplace_back("c", c);
      b.params.emplace_back("F_x0", t0);
      const auto drift = boundary_drift_table(r.link.beta, c, r.link, r.features, r.x0, grid);
      parallel_for(M, threads, [&](std::size_t i) {
        Rng rng(seed, e, static_cast<std::uint32_t>(i));
        b.draws[i] = boundary_limit_sample(r.link, r.features, r.x0, drift, grid, rng);
      });
      break;
    }
    case LimitLaw::l1_fast_maxA: {
      detail::require(!grid.two_sided, "simulate_limit: l1_fast_maxA needs a one-sided [0,1] grid");
      parallel_for(M, threads, [&](std::size_t i) {
        Rng rng(seed, e, static_cast<std::uint32_t>(i));
        b.draws[i] = l1_fast_limit_sample(r.link, grid, rng);
      });
      break;
    }
  }
  return b;
}

inline LimitBatch simulate_limit(const LimitRequest& r, std::size_t M, std::uint64_t seed, unsigned threads = 1) {
  return simulate_limit(r, M, seed, threads, default_grid(r));
}

}  // namespace wfi
