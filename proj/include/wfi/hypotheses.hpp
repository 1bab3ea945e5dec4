#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace wfi {

/// Continuous piecewise-affine function through (knots[i], values[i]),
/// constant outside [knots.front(), knots.back()].
struct PiecewiseAffine {
  std::vector<double> knots;
  std::vector<double> values;

  double operator()(double x) const {
    if (x <= knots.front()) return values.front();
    if (x >= knots.back()) return values.back();
    const auto it = std::upper_bound(knots.begin(), knots.end(), x);
    const std::size_t k = static_cast<std::size_t>(it - knots.begin());
    const double t = (x - knots[k - 1]) / (knots[k] - knots[k - 1]);
    return values[k - 1] + t * (values[k] - values[k - 1]);
  }

  std::span<const double> breakpoints() const { return knots; }

  double max_slope() const {
    double s = 0.0;
    for (std::size_t k = 1; k < knots.size(); ++k) {
      s = std::max(s, (values[k] - values[k - 1]) / (knots[k] - knots[k - 1]));
    }
    return s;
  }

  void validate() const {
    detail::require(knots.size() >= 2 && knots.size() == values.size(),
                    "piecewise-affine: need matching knots and values");
    for (std::size_t k = 1; k < knots.size(); ++k) {
      detail::require(knots[k] > knots[k - 1], "piecewise-affine: knots must be increasing");
    }
  }
};

enum class PointwiseCase { fast, slow };

struct HypothesisPair {
  PointwiseCase regime = PointwiseCase::fast;
  PiecewiseAffine phi0;
  PiecewiseAffine phi1;
  double delta = 0.0;
  std::int64_t n = 1;
  double C = 0.0;
  double x0 = 0.0;
  double T = 1.0;

  /// |phi0(x0) - phi1(x0)|
  double separation() const { return std::abs(phi0(x0) - phi1(x0)); }
};

struct HypothesisCube {
  double delta = 0.0;
  std::int64_t n = 1;
  double C = 0.0;
  double T = 1.0;
  std::size_t m = 0;
  double h = 0.0;
  std::vector<double> grid;  // x_k = -T + 2 k h, k = 0..m

  /// Phi_gamma = 1/4 + sum_k [gamma_k phi_k + (1 - gamma_k) psi_k]. Bit 1
  /// selects slopes (delta/2, delta) on the two halves of cell k, bit 0
  /// selects (delta, delta/2).
  PiecewiseAffine evaluate(std::span<const std::uint8_t> bits) const {
    detail::require(bits.size() == m, "assouad cube: bit vector must have length m");
    PiecewiseAffine f;
    f.knots.reserve(2 * m + 1);
    f.values.reserve(2 * m + 1);
    double level = 0.25;
    f.knots.push_back(grid[0]);
    f.values.push_back(level);
    for (std::size_t k = 0; k < m; ++k) {
      const double first = bits[k] ? 0.5 * delta : delta;
      const double second = bits[k] ? delta : 0.5 * delta;
      level += first * h;
      f.knots.push_back(grid[k] + h);
      f.values.push_back(level);
      level += second * h;
      f.knots.push_back(k + 1 == m ? T : grid[k + 1]);
      f.values.push_back(level);
    }
    return f;
  }

  /// L1 distance on cell k between the two slope patterns: h * delta h / 2.
  double cell_l1_gap() const { return 0.5 * delta * h * h; }
};

//==============================================================================
// Default constants
//==============================================================================

inline double default_c_pointwise_fast() { return 0.4; }

inline double c_bound_pointwise_slow(const FeatureLaw& law) {
  return std::min(std::cbrt(4.0 * law.T()) / 8.0, std::cbrt(1.0 / (32.0 * law.sup_density())));
}

inline double default_c_pointwise_slow(const FeatureLaw& law) { return 0.5 * c_bound_pointwise_slow(law); }

inline double c_bound_assouad(const FeatureLaw& law) { return std::cbrt(1.0 / (32.0 * law.sup_density())); }

inline double default_c_assouad(const FeatureLaw& law) { return 0.5 * c_bound_assouad(law); }

//==============================================================================
// Builders
//==============================================================================

/// Two-point hypotheses for the pointwise lower bound at x0. The fast pair
/// (delta < n^{-1/2}) is two parallel lines of slope delta; the slow pair
/// has slope delta/2 except on a kink of width 4C (n delta^2)^{-1/3} on the
/// left (phi0) or right (phi1) of x0, where the slope is delta.
inline HypothesisPair build_pointwise_hypotheses(double delta, std::int64_t n, double C,
                                                 const FeatureLaw& law, double x0) {
  const double T = law.T();
  const double nd = static_cast<double>(n);
  detail::require(n >= 1, "pointwise hypotheses: n must be positive");
  detail::require(delta >= 0.0 && delta <= 1.0 / (4.0 * T),
                  "pointwise hypotheses: delta must lie in [0, 1/(4T)]");
  detail::require(x0 > -T && x0 < T, "pointwise hypotheses: x0 must be interior to [-T, T]");
  detail::require(C > 0.0, "pointwise hypotheses: C must be positive");

  HypothesisPair p;
  p.delta = delta;
  p.n = n;
  p.C = C;
  p.x0 = x0;
  p.T = T;

  if (delta < 1.0 / std::sqrt(nd)) {
    detail::require(C < 1.0 / std::sqrt(2.0), "pointwise hypotheses (fast): violated C < 1/sqrt(2)");
    detail::require(nd >= 16.0 * (C + T) * (C + T),
                    "pointwise hypotheses (fast): violated n >= 16 (C + T)^2");
    p.regime = PointwiseCase::fast;
    const double gap = 2.0 * C / std::sqrt(nd);
    const double eta = 0.5 - delta * T - C / std::sqrt(nd);
    p.phi1 = {{-T, T}, {eta, eta + 2.0 * delta * T}};
    p.phi0 = {{-T, T}, {eta + gap, eta + gap + 2.0 * delta * T}};
    return p;
  }

  const double bound = c_bound_pointwise_slow(law);
  detail::require(C < bound,
                  "pointwise hypotheses (slow): violated C < min{(4T)^{1/3}/8, (32 sup p)^{-1/3}}");
  detail::require(nd >= 4096.0 * C * C * C, "pointwise hypotheses (slow): violated n >= 16^3 C^3");
  const double w = 4.0 * C * std::cbrt(1.0 / (nd * delta * delta));
  detail::require(x0 - w > -T && x0 + w < T,
                  "pointwise hypotheses (slow): kink [x0 - 4C(n delta^2)^{-1/3}, x0 + 4C(n delta^2)^{-1/3}] "
                  "must lie inside (-T, T)");
  p.regime = PointwiseCase::slow;
  const double eta = 0.5 - 0.5 * delta * (x0 + T);
  const double half = 0.5 * delta;
  p.phi0 = {{-T, x0 - w, x0, T},
            {eta, eta + half * (x0 - w + T), eta + half * (x0 + T + w), eta + half * (2.0 * T + w)}};
  p.phi1 = {{-T, x0, x0 + w, T},
            {eta, eta + half * (x0 + T), eta + half * (x0 + T) + delta * w, eta + half * (2.0 * T + w)}};
  return p;
}

/// Assouad hypercube with m = floor((nδ²)^{1/3} / (4C)) cells of width 2h, h = T/m.
inline HypothesisCube build_assouad_cube(double delta, std::int64_t n, double C, double T) {
  const double nd = static_cast<double>(n);
  detail::require(T > 0.0, "assouad cube: T must be positive");
  detail::require(n >= 1, "assouad cube: n must be positive");
  detail::require(C > 0.0, "assouad cube: C must be positive");
  detail::require(delta >= 1.0 / std::sqrt(nd) && delta <= 1.0 / (4.0 * T),
                  "assouad cube: delta must lie in [n^{-1/2}, 1/(4T)]");
  detail::require(nd >= 16.0 * T * T, "assouad cube: violated n >= 16 T^2");
  const double raw = std::cbrt(nd * delta * delta) / (4.0 * C);
  // Guard floor() against rounding just below an integer.
  const auto m = static_cast<std::size_t>(std::floor(raw * (1.0 + 1e-12)));
  if (m == 0) throw InvalidArgument("assouad cube: degenerate cube (m = 0)");
  HypothesisCube c;
  c.delta = delta;
  c.n = n;
  c.C = C;
  c.T = T;
  c.m = m;
  c.h = T / static_cast<double>(m);
  c.grid.resize(m + 1);
  for (std::size_t k = 0; k <= m; ++k) c.grid[k] = -T + 2.0 * static_cast<double>(k) * c.h;
  c.grid[m] = T;
  return c;
}

//==============================================================================
// Class membership
//==============================================================================

struct MembershipReport {
  bool monotone = true;
  bool in_unit_interval = true;
  double lipschitz = 0.0;       // largest grid difference quotient
  double modulus_ratio = 0.0;   // min over dyadic nu of omega_nu / nu
  bool lipschitz_ok = true;
  bool modulus_ok = true;

  bool ok() const { return monotone && in_unit_interval && lipschitz_ok && modulus_ok; }
};

/// Checks membership in the class of nondecreasing maps into [0, 1] with
/// Lipschitz constant at most delta on [-T, T] and modulus ratio
/// omega_nu / nu >= delta / 2 for nu = 2T 2^{-j}, j = 0..levels-1. Grid
/// resolution is 2T / 2^grid_log2, so every dyadic shift lands on nodes.
template <class F>
MembershipReport check_membership(const F& f, double delta, double T, int grid_log2 = 14,
                                  int levels = 12, double rel_tol = 1e-9) {
  detail::require(levels <= grid_log2, "check_membership: levels must not exceed grid_log2");
  const std::size_t N = std::size_t{1} << grid_log2;
  const double step = 2.0 * T / static_cast<double>(N);
  std::vector<double> v(N + 1);
  for (std::size_t i = 0; i <= N; ++i) v[i] = f(-T + step * static_cast<double>(i));

  MembershipReport r;
  for (std::size_t i = 0; i <= N; ++i) {
    if (v[i] < 0.0 || v[i] > 1.0) r.in_unit_interval = false;
    if (i > 0) {
      if (v[i] < v[i - 1]) r.monotone = false;
      r.lipschitz = std::max(r.lipschitz, (v[i] - v[i - 1]) / step);
    }
  }
  r.lipschitz_ok = r.lipschitz <= delta * (1.0 + rel_tol) + 1e-15;

  r.modulus_ratio = std::numeric_limits<double>::infinity();
  for (int j = 0; j < levels; ++j) {
    const std::size_t shift = N >> j;
    const double nu = step * static_cast<double>(shift);
    double omega = 0.0;
    for (std::size_t i = 0; i + shift <= N; ++i) omega = std::max(omega, v[i + shift] - v[i]);
    r.modulus_ratio = std::min(r.modulus_ratio, omega / nu);
  }
  r.modulus_ok = r.modulus_ratio >= 0.5 * delta * (1.0 - rel_tol) - 1e-15;
  return r;
}

}  // namespace wfi
