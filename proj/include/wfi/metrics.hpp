#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <span>
#include <vector>

#include "error.hpp"
#include "estimator.hpp"
#include "model.hpp"
#include "quadrature.hpp"

namespace wfi {

namespace detail {

template <class F>
concept HasBreakpoints = requires(const F& f) {
  { f.breakpoints() } -> std::convertible_to<std::span<const double>>;
};

template <class F>
void append_breakpoints(const F& f, std::vector<double>& out) {
  if constexpr (HasBreakpoints<F>) {
    const std::span<const double> b = f.breakpoints();
    out.insert(out.end(), b.begin(), b.end());
  }
}

// Sorted unique cut points of [lo, hi] including both ends.
inline std::vector<double> pieces(double lo, double hi, std::vector<double> cuts) {
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (c < lo || c > hi) continue;
    if (out.empty() || c > out.back()) out.push_back(c);
  }
  return out;
}

// Integrates f(x, a, b) over [lo, hi] split at `cuts`; each piece [a, b]
// gets a share of the absolute tolerance proportional to its length.
template <class F>
double integrate_pieces(const F& f, double lo, double hi, const std::vector<double>& cuts,
                        const QuadratureCfg& q) {
  const auto knots = pieces(lo, hi, cuts);
  double total = 0.0;
  const double span_len = hi - lo;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    QuadratureCfg local = q;
    local.abs_tol = std::max(q.abs_tol * (b - a) / span_len, 1e-300);
    total += integrate([&](double x) { return f(x, a, b); }, a, b, local);
  }
  return total;
}

// Value of f on the open piece (a, b), extended to the endpoints by one-ulp
// nudges inward, so a jump at a or b never leaks into the piece.
template <class F>
double on_piece(const F& f, double x, double a, double b) {
  if (x == a) return f(std::nextafter(a, b));
  if (x == b) return f(std::nextafter(b, a));
  return f(x);
}

}  // namespace detail

//==============================================================================
// Hellinger semi-metric
//==============================================================================

/// d(f, g) = sqrt( 1/2 int (sqrt(1-f) - sqrt(1-g))^2 + (sqrt f - sqrt g)^2 dP_X ).
/// Integration is split at the breakpoints of f and g (step jumps, kinks),
/// then adaptive Simpson on each piece.
template <class F, class G>
double hellinger(const F& f, const G& g, const FeatureLaw& law, const QuadratureCfg& q = {}) {
  q.validate();
  std::vector<double> cuts;
  detail::append_breakpoints(f, cuts);
  detail::append_breakpoints(g, cuts);
  auto integrand = [&](double x, double a, double b) {
    const double fx = std::clamp(detail::on_piece(f, x, a, b), 0.0, 1.0);
    const double gx = std::clamp(detail::on_piece(g, x, a, b), 0.0, 1.0);
    const double u = std::sqrt(1.0 - fx) - std::sqrt(1.0 - gx);
    const double v = std::sqrt(fx) - std::sqrt(gx);
    return (u * u + v * v) * law.density(x);
  };
  const double T = law.T();
  const double sq = 0.5 * detail::integrate_pieces(integrand, -T, T, cuts, q);
  return std::sqrt(std::max(sq, 0.0));
}

//==============================================================================
// L1 errors
//==============================================================================

enum class Measure { lebesgue, feature_law, empirical };

/// Exact piecewise L1 distance between a step function and a continuous
/// nondecreasing target over [lo, hi], weighted by `weight(x)`. On each
/// constancy interval the crossing of the target with the step level is
/// found by bisection; on each side the sign of (step - target) is fixed,
/// so only the smooth integral of the target is left to quadrature.
template <class Target, class Weight>
double l1_error_weighted(const StepEstimate& step, const Target& target, double lo, double hi,
                         const Weight& weight, const QuadratureCfg& q = {}) {
  q.validate();
  std::vector<double> cuts(step.jump_xs.begin(), step.jump_xs.end());
  const auto knots = detail::pieces(lo, hi, cuts);
  const double span_len = hi - lo;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    const double level = step(0.5 * (a + b));
    QuadratureCfg local = q;
    local.abs_tol = std::max(q.abs_tol * (b - a) / span_len, 1e-300);
    const double c = find_crossing(target, level, a, b, 1e-12);
    auto below = [&](double x) { return (level - target(x)) * weight(x); };
    auto above = [&](double x) { return (target(x) - level) * weight(x); };
    total += integrate(below, a, c, local) + integrate(above, c, b, local);
  }
  return total;
}

/// int_{lo}^{hi} |step - target| dt
template <class Target>
double l1_error_lebesgue(const StepEstimate& step, const Target& target, double lo, double hi,
                         const QuadratureCfg& q = {}) {
  return l1_error_weighted(step, target, lo, hi, [](double) { return 1.0; }, q);
}

/// int |step - target| dP_X
template <class Target>
double l1_error_feature_law(const StepEstimate& step, const Target& target, const FeatureLaw& law,
                            const QuadratureCfg& q = {}) {
  return l1_error_weighted(step, target, -law.T(), law.T(),
                           [&](double x) { return law.density(x); }, q);
}

/// int |step - target| dP_n: weighted average over the sample points.
template <class Target>
double l1_error_empirical(const StepEstimate& step, const Target& target, const Sample& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    total += static_cast<double>(s.weights[i]) * std::abs(step(s.xs[i]) - target(s.xs[i]));
  }
  return total / static_cast<double>(s.size());
}

struct L1Context {
  double lo = -1.0;
  double hi = 1.0;
  const FeatureLaw* law = nullptr;
  const Sample* sample = nullptr;
  QuadratureCfg quadrature{};
};

template <class Target>
double l1_error(const StepEstimate& step, const Target& target, Measure measure, const L1Context& ctx) {
  switch (measure) {
    case Measure::lebesgue: return l1_error_lebesgue(step, target, ctx.lo, ctx.hi, ctx.quadrature);
    case Measure::feature_law:
      detail::require(ctx.law != nullptr, "l1_error: feature_law measure needs a law");
      return l1_error_feature_law(step, target, *ctx.law, ctx.quadrature);
    case Measure::empirical:
      detail::require(ctx.sample != nullptr, "l1_error: empirical measure needs a sample");
      return l1_error_empirical(step, target, *ctx.sample);
  }
  return 0.0;
}

//==============================================================================
// Sup norm
//==============================================================================

/// sup_{x in [lo, hi]} |step(x) - target(x)| for continuous monotone target.
/// On each constancy piece the gap is monotone, so the extremes sit at the
/// piece ends: interval endpoints and both one-sided limits at each jump.
template <class Target>
double sup_norm_on(const StepEstimate& step, const Target& target, double lo, double hi) {
  detail::require(hi >= lo, "sup_norm_on: empty interval");
  double best = std::max(std::abs(step(lo) - target(lo)), std::abs(step.left_limit(hi) - target(hi)));
  best = std::max(best, std::abs(step(hi) - target(hi)));
  for (double j : step.jump_xs) {
    if (j <= lo || j > hi) continue;
    const double t = target(j);
    best = std::max({best, std::abs(step.left_limit(j) - t), std::abs(step(j) - t)});
  }
  return best;
}

//==============================================================================
// Kolmogorov-Smirnov
//==============================================================================

/// Two-sample statistic sup_x |F_a(x) - F_b(x)| by sorted merge scan.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  detail::require(!a.empty() && !b.empty(), "ks_two_sample: samples must be nonempty");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// One-sample statistic against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::span<const double> a, const Cdf& cdf) {
  detail::require(!a.empty(), "ks_one_sample: sample must be nonempty");
  std::vector<double> s(a.begin(), a.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = cdf(s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

//==============================================================================
// Partial-sum representation of the empirical L1 error
//==============================================================================

/// max over s of A_n(s) / sqrt(n) = (1/n) sum_i (y_i - p0)(1 - 2 1{x_i <= s}),
/// scanning s over -inf and every sample point.
inline double an_process_max(const Sample& s, double p0) {
  detail::require(!s.empty(), "an_process_max: empty sample");
  const double n = static_cast<double>(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    total += static_cast<double>(s.ones[i]) - p0 * static_cast<double>(s.weights[i]);
  }
  // value(s) = total - 2 * partial(s)
  double best = total;
  double partial = 0.0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    partial += static_cast<double>(s.ones[i]) - p0 * static_cast<double>(s.weights[i]);
    best = std::max(best, total - 2.0 * partial);
  }
  return best / n;
}

/// sup over s of int (fit - p0)(1 - 2 1{x <= s}) dP_n. Equals the empirical
/// L1 distance between a monotone fit and the constant p0.
inline double jump_representation(const StepEstimate& fit, const Sample& s, double p0) {
  detail::require(!s.empty(), "jump_representation: empty sample");
  const double n = static_cast<double>(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.blocks(); ++i) total += static_cast<double>(s.weights[i]) * (fit(s.xs[i]) - p0);
  double best = total;
  double partial = 0.0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    partial += static_cast<double>(s.weights[i]) * (fit(s.xs[i]) - p0);
    best = std::max(best, total - 2.0 * partial);
  }
  return best / n;
}

}  // namespace wfi
