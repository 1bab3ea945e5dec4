#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "convex.hpp"
#include "error.hpp"
#include "model.hpp"

namespace wfi {

//==============================================================================
// Cusum diagram and its greatest convex minorant
//==============================================================================

/// Points (t_i, v_i), i = 0..K: t_i the cumulative weight fraction of the
/// first i blocks and v_i = (number of ones in the first i blocks) / n.
/// The origin is included.
struct CusumDiagram {
  std::vector<double> ts;
  std::vector<double> vs;
};

struct ConvexMinorant {
  std::vector<double> hull_ts;
  std::vector<double> hull_vs;
  std::vector<double> slopes;  // slopes[j] on (hull_ts[j], hull_ts[j+1]]

  double value(double t) const {
    if (t <= hull_ts.front()) return hull_vs.front();
    if (t >= hull_ts.back()) return hull_vs.back();
    const auto it = std::lower_bound(hull_ts.begin(), hull_ts.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - hull_ts.begin());
    return hull_vs[k - 1] + slopes[k - 1] * (t - hull_ts[k - 1]);
  }
};

inline CusumDiagram cusum_diagram(const Sample& s) {
  if (s.empty()) throw InvalidArgument("empty sample");
  const double n = static_cast<double>(s.size());
  CusumDiagram d;
  d.ts.reserve(s.blocks() + 1);
  d.vs.reserve(s.blocks() + 1);
  d.ts.push_back(0.0);
  d.vs.push_back(0.0);
  std::int64_t w = 0;
  std::int64_t c = 0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    w += s.weights[i];
    c += s.ones[i];
    d.ts.push_back(static_cast<double>(w) / n);
    d.vs.push_back(static_cast<double>(c) / n);
  }
  return d;
}

inline ConvexMinorant greatest_convex_minorant(const CusumDiagram& d) {
  detail::require(d.ts.size() == d.vs.size() && d.ts.size() >= 2,
                  "greatest_convex_minorant: need at least two diagram points");
  const auto idx = lower_hull(d.ts, d.vs);
  // Rounding in the orientation test can leave nearly collinear vertices;
  // drop any vertex whose computed slopes do not strictly increase.
  ConvexMinorant m;
  m.hull_ts.push_back(d.ts[idx.front()]);
  m.hull_vs.push_back(d.vs[idx.front()]);
  for (std::size_t k = 1; k < idx.size(); ++k) {
    const double t = d.ts[idx[k]];
    const double v = d.vs[idx[k]];
    double slope = (v - m.hull_vs.back()) / (t - m.hull_ts.back());
    while (!m.slopes.empty() && !(slope > m.slopes.back())) {
      m.slopes.pop_back();
      m.hull_ts.pop_back();
      m.hull_vs.pop_back();
      slope = (v - m.hull_vs.back()) / (t - m.hull_ts.back());
    }
    m.hull_ts.push_back(t);
    m.hull_vs.push_back(v);
    m.slopes.push_back(slope);
  }
  return m;
}

/// Left derivative of the minorant at t: slope of the segment whose
/// half-open interval (previous vertex, vertex] contains t.
inline double left_derivative(const ConvexMinorant& m, double t) {
  if (!(t > m.hull_ts.front())) {
    throw InvalidArgument("left_derivative: t must exceed the left end of the domain");
  }
  if (t > m.hull_ts.back()) {
    throw InvalidArgument("left_derivative: t beyond the right end of the domain");
  }
  const auto it = std::lower_bound(m.hull_ts.begin(), m.hull_ts.end(), t);
  return m.slopes[static_cast<std::size_t>(it - m.hull_ts.begin()) - 1];
}

//==============================================================================
// Step estimate
//==============================================================================

/// Right-continuous nondecreasing step function: zero left of jump_xs[0]
/// (the smallest sample point), values[k] on [jump_xs[k], jump_xs[k+1]),
/// and values.back() from the last jump on.
struct StepEstimate {
  std::vector<double> jump_xs;
  std::vector<double> values;
  std::int64_t sample_size = 0;

  double operator()(double x) const {
    if (jump_xs.empty() || x < jump_xs.front()) return 0.0;
    const auto it = std::upper_bound(jump_xs.begin(), jump_xs.end(), x);
    return values[static_cast<std::size_t>(it - jump_xs.begin()) - 1];
  }

  /// Left limit at x.
  double left_limit(double x) const {
    if (jump_xs.empty() || x <= jump_xs.front()) return 0.0;
    const auto it = std::lower_bound(jump_xs.begin(), jump_xs.end(), x);
    return values[static_cast<std::size_t>(it - jump_xs.begin()) - 1];
  }

  std::span<const double> breakpoints() const { return jump_xs; }

  /// Builds the step function from one value per sample block, keeping
  /// only the points where the value changes (plus the first point).
  static StepEstimate from_block_values(const Sample& s, std::span<const double> block_values) {
    StepEstimate f;
    f.sample_size = s.size();
    for (std::size_t i = 0; i < s.blocks(); ++i) {
      if (i == 0 || block_values[i] != f.values.back()) {
        f.jump_xs.push_back(s.xs[i]);
        f.values.push_back(block_values[i]);
      }
    }
    return f;
  }
};

//==============================================================================
// NPMLE via the convex minorant, and PAVA as an independent route
//==============================================================================

/// NPMLE values at the sample blocks: left derivative of the GCM of the
/// cusum diagram at each block's cumulative fraction. The hull is built on
/// the integer cumulative counts, so orientation tests are exact.
inline std::vector<double> npmle_values(const Sample& s) {
  if (s.empty()) throw InvalidArgument("empty sample");
  const std::size_t K = s.blocks();
  std::vector<std::int64_t> W(K + 1, 0);
  std::vector<std::int64_t> C(K + 1, 0);
  for (std::size_t i = 0; i < K; ++i) {
    W[i + 1] = W[i] + s.weights[i];
    C[i + 1] = C[i] + s.ones[i];
  }
  std::vector<std::size_t> hull;
  hull.reserve(K + 1);
  for (std::size_t i = 0; i <= K; ++i) {
    while (hull.size() >= 2) {
      const std::size_t o = hull[hull.size() - 2];
      const std::size_t a = hull.back();
      const __int128 cross = static_cast<__int128>(W[a] - W[o]) * (C[i] - C[o]) -
                             static_cast<__int128>(C[a] - C[o]) * (W[i] - W[o]);
      if (cross > 0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  std::vector<double> values(K);
  for (std::size_t k = 1; k < hull.size(); ++k) {
    const std::size_t a = hull[k - 1];
    const std::size_t b = hull[k];
    const double slope = static_cast<double>(C[b] - C[a]) / static_cast<double>(W[b] - W[a]);
    for (std::size_t i = a; i < b; ++i) values[i] = slope;
  }
  return values;
}

inline StepEstimate npmle_fit(const Sample& s) {
  const auto v = npmle_values(s);
  return StepEstimate::from_block_values(s, v);
}

/// Pool-adjacent-violators: weighted means of pooled blocks.
inline std::vector<double> pava_values(const Sample& s) {
  if (s.empty()) throw InvalidArgument("empty sample");
  struct Pool {
    std::int64_t ones;
    std::int64_t weight;
    std::size_t blocks;
  };
  std::vector<Pool> stack;
  stack.reserve(s.blocks());
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    Pool cur{s.ones[i], s.weights[i], 1};
    // prev mean > cur mean  <=>  prev.ones * cur.weight > cur.ones * prev.weight
    while (!stack.empty() && static_cast<__int128>(stack.back().ones) * cur.weight >
                                 static_cast<__int128>(cur.ones) * stack.back().weight) {
      cur.ones += stack.back().ones;
      cur.weight += stack.back().weight;
      cur.blocks += stack.back().blocks;
      stack.pop_back();
    }
    stack.push_back(cur);
  }
  std::vector<double> values;
  values.reserve(s.blocks());
  for (const auto& p : stack) {
    const double mean = static_cast<double>(p.ones) / static_cast<double>(p.weight);
    values.insert(values.end(), p.blocks, mean);
  }
  return values;
}

inline StepEstimate pava_fit(const Sample& s) {
  const auto v = pava_values(s);
  return StepEstimate::from_block_values(s, v);
}

//==============================================================================
// Inverse process and switch relation
//==============================================================================

struct InverseValue {
  double grid_t = 0.0;   // U~_n(a), a cumulative fraction i/n
  double x_value = 0.0;  // F_n^{-1}(U~_n(a)); -inf when grid_t = 0
  std::size_t vertex = 0;
};

namespace detail {

// Scans diagram vertices for the minimum of C_i - a W_i. Vertex i replaces
// the current best b when the chord slope fl((C_i - C_b) / (W_i - W_b)) is
// at most a (`largest`, the supremum of minimizers) or below a (the infimum).
// The fit stores its slopes with the same correctly rounded division, so both
// switch relations hold exactly against the double-valued fit: fl is
// monotone, and a ratio of counts below 2^53 never sits on a rounding midpoint.
inline std::size_t argmin_vertex(const Sample& s, double a, bool largest) {
  std::int64_t W = 0;
  std::int64_t C = 0;
  std::int64_t best_w = 0;
  std::int64_t best_c = 0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    W += s.weights[i];
    C += s.ones[i];
    const double chord = static_cast<double>(C - best_c) / static_cast<double>(W - best_w);
    if (largest ? chord <= a : chord < a) {
      best = i + 1;
      best_w = W;
      best_c = C;
    }
  }
  return best;
}

inline double cumulative_fraction(const Sample& s, std::size_t vertex) {
  std::int64_t w = 0;
  for (std::size_t i = 0; i < vertex; ++i) w += s.weights[i];
  return static_cast<double>(w) / static_cast<double>(s.size());
}

}  // namespace detail

/// U~_n(a): largest cusum-diagram abscissa minimising Upsilon_n(t) - a t,
/// together with its preimage F_n^{-1}(U~_n(a)).
inline InverseValue inverse_process(const Sample& s, double a) {
  if (s.empty()) throw InvalidArgument("empty sample");
  detail::require(a >= 0.0 && a <= 1.0, "inverse_process: a must lie in [0,1]");
  InverseValue out;
  out.vertex = detail::argmin_vertex(s, a, true);
  out.grid_t = detail::cumulative_fraction(s, out.vertex);
  out.x_value = out.vertex == 0 ? -std::numeric_limits<double>::infinity() : s.xs[out.vertex - 1];
  return out;
}

/// Empirical distribution function of the covariates.
inline double empirical_cdf(const Sample& s, double x) {
  const auto it = std::upper_bound(s.xs.begin(), s.xs.end(), x);
  std::int64_t w = 0;
  for (auto i = s.xs.begin(); i != it; ++i) w += s.weights[static_cast<std::size_t>(i - s.xs.begin())];
  return static_cast<double>(w) / static_cast<double>(s.size());
}

struct SwitchRecord {
  bool lhs = false;
  bool rhs = false;
  bool agrees() const { return lhs == rhs; }
};

/// Strict switch relation: NPMLE(x) > a  <=>  U~_n(a) < F_n(x).
inline SwitchRecord switch_check(const Sample& s, const StepEstimate& fit, double x, double a) {
  SwitchRecord r;
  r.lhs = fit(x) > a;
  r.rhs = inverse_process(s, a).grid_t < empirical_cdf(s, x);
  return r;
}

inline SwitchRecord switch_check(const Sample& s, double x, double a) {
  return switch_check(s, npmle_fit(s), x, a);
}

/// Non-strict companion: NPMLE(x) >= a  <=>  (smallest minimiser of
/// Upsilon_n(t) - a t over the vertices) < F_n(x).
inline SwitchRecord switch_check_weak(const Sample& s, const StepEstimate& fit, double x, double a) {
  SwitchRecord r;
  r.lhs = fit(x) >= a;
  const std::size_t v = detail::argmin_vertex(s, a, false);
  r.rhs = detail::cumulative_fraction(s, v) < empirical_cdf(s, x);
  return r;
}

//==============================================================================
// Log-likelihood
//==============================================================================

/// Sum over blocks of ones * log f(x) + (weight - ones) * log(1 - f(x)),
/// with 0 log 0 = 0. Returns -inf when a positive count meets probability 0.
template <class F>
double log_likelihood(const F& f, const Sample& s) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    const double p = f(s.xs[i]);
    const auto ones = s.ones[i];
    const auto zeros = s.weights[i] - ones;
    if (ones > 0) {
      if (p <= 0.0) return -std::numeric_limits<double>::infinity();
      total += static_cast<double>(ones) * std::log(p);
    }
    if (zeros > 0) {
      if (p >= 1.0) return -std::numeric_limits<double>::infinity();
      total += static_cast<double>(zeros) * std::log1p(-p);
    }
  }
  return total;
}

/// Constancy blocks of a fit over the sample: [first, last) block-index
/// ranges on which the fitted value is constant.
inline std::vector<std::pair<std::size_t, std::size_t>> constancy_blocks(const Sample& s,
                                                                         const StepEstimate& fit) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  for (std::size_t i = 1; i <= s.blocks(); ++i) {
    if (i == s.blocks() || fit(s.xs[i]) != fit(s.xs[start])) {
      out.emplace_back(start, i);
      start = i;
    }
  }
  return out;
}

}  // namespace wfi
