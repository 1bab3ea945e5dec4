#pragma once

#include <cmath>
#include <string>

#include "error.hpp"

namespace wfi {

struct QuadratureCfg {
  double abs_tol = 1e-10;
  int max_depth = 48;

  void validate() const {
    detail::require(abs_tol > 0.0, "QuadratureCfg: abs_tol must be positive");
    detail::require(max_depth >= 10, "QuadratureCfg: max_depth must be at least 10");
  }
};

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth, int max_depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= max_depth || !(lm > a && m > lm && rm > m && b > rm)) {
    throw NumericalError("adaptive Simpson did not converge on [" + std::to_string(a) + ", " +
                         std::to_string(b) + "] at depth " + std::to_string(depth));
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1, max_depth) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance
/// q.abs_tol. Throws NumericalError when a sub-interval reaches
/// q.max_depth without meeting its share of the tolerance.
template <class F>
double integrate(const F& f, double a, double b, const QuadratureCfg& q = {}) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, m, fm, b, fb, whole, q.abs_tol, 0, q.max_depth);
}

/// Locates where the nondecreasing function f crosses `level` on [lo, hi]
/// by bisection. Returns lo if f(lo) >= level and hi if f(hi) < level.
template <class F>
double find_crossing(const F& f, double level, double lo, double hi, double tol = 1e-12) {
  if (f(lo) >= level) return lo;
  if (f(hi) < level) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace wfi
