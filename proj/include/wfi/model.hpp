#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace wfi {

//==============================================================================
// Base link Phi0
//==============================================================================

enum class LinkKind { logistic, probit, affine_clamped, beta_flat, constant };

inline std::string to_string(LinkKind k) {
  switch (k) {
    case LinkKind::logistic: return "logistic";
    case LinkKind::probit: return "probit";
    case LinkKind::affine_clamped: return "affine_clamped";
    case LinkKind::beta_flat: return "beta_flat";
    case LinkKind::constant: return "constant";
  }
  return "?";
}

inline LinkKind link_kind_from_string(const std::string& s) {
  if (s == "logistic") return LinkKind::logistic;
  if (s == "probit") return LinkKind::probit;
  if (s == "affine_clamped") return LinkKind::affine_clamped;
  if (s == "beta_flat") return LinkKind::beta_flat;
  if (s == "constant") return LinkKind::constant;
  throw InvalidArgument("unknown link kind '" + s + "'");
}

namespace detail {

// Coefficients (ascending powers of L) of the polynomial P_k with
// Lambda^{(k)} = P_k(Lambda) for the logistic Lambda.
inline std::vector<std::vector<double>> logistic_derivative_polys(int max_order) {
  std::vector<std::vector<double>> polys(max_order + 1);
  polys[0] = {0.0, 1.0};
  for (int k = 1; k <= max_order; ++k) {
    const auto& prev = polys[k - 1];
    // P_k = P_{k-1}'(L) * (L - L^2)
    std::vector<double> deriv(prev.size() > 1 ? prev.size() - 1 : 1, 0.0);
    for (std::size_t j = 1; j < prev.size(); ++j) deriv[j - 1] = prev[j] * static_cast<double>(j);
    std::vector<double> next(deriv.size() + 2, 0.0);
    for (std::size_t j = 0; j < deriv.size(); ++j) {
      next[j + 1] += deriv[j];
      next[j + 2] -= deriv[j];
    }
    polys[k] = std::move(next);
  }
  return polys;
}

inline double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

inline double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

inline double logistic_derivative(double u, int order) {
  static const auto polys = logistic_derivative_polys(8);
  return horner(polys.at(order), logistic(u));
}

// Probabilists' Hermite polynomial He_k.
inline double hermite_he(int k, double u) {
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = u;
  for (int j = 1; j < k; ++j) {
    const double next = u * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// Partial Bell polynomials B_{n,k}(x_1, ..., x_{n-k+1}), with x[j-1] = x_j.
inline double bell(int n, int k, const std::vector<double>& x) {
  if (n == 0 && k == 0) return 1.0;
  if (n == 0 || k == 0) return 0.0;
  double total = 0.0;
  double binom = 1.0;  // C(n-1, i-1)
  for (int i = 1; i <= n - k + 1; ++i) {
    total += binom * x[i - 1] * bell(n - i, k - 1, x);
    binom = binom * (n - i) / i;
  }
  return total;
}

inline double falling_factorial(int n, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= n - j;
  return r;
}

}  // namespace detail

/// Base link Phi0 with derivatives and flatness order beta (first
/// non-vanishing derivative at 0).
///
/// `constant` is a degenerate link used only to exercise deterministic labels;
/// it does not satisfy the flatness invariants.
struct LinkSpec {
  LinkKind kind = LinkKind::logistic;
  int beta = 1;
  std::vector<double> params;

  static constexpr int kMaxSmoothOrder = 8;

  static LinkSpec logistic() { return {LinkKind::logistic, 1, {}}; }
  static LinkSpec probit() { return {LinkKind::probit, 1, {}}; }

  /// clamp(base + slope * u, 0, 1)
  static LinkSpec affine_clamped(double base, double slope) {
    detail::require(base > 0.0 && base < 1.0, "affine_clamped: base must lie in (0,1)");
    detail::require(slope > 0.0, "affine_clamped: slope must be positive");
    return {LinkKind::affine_clamped, 1, {base, slope}};
  }

  /// Lambda(u^beta) for odd beta; even beta would not be monotone.
  static LinkSpec beta_flat(int beta) {
    detail::require(beta >= 1 && beta % 2 == 1,
                    "beta_flat: beta must be a positive odd integer (even beta breaks monotonicity)");
    detail::require(beta <= kMaxSmoothOrder, "beta_flat: beta above supported derivative order");
    return {LinkKind::beta_flat, beta, {}};
  }

  static LinkSpec constant(double p) {
    detail::require(p >= 0.0 && p <= 1.0, "constant link: value must lie in [0,1]");
    return {LinkKind::constant, 1, {p}};
  }

  static LinkSpec make(LinkKind kind, int beta, std::vector<double> params) {
    switch (kind) {
      case LinkKind::logistic: return logistic();
      case LinkKind::probit: return probit();
      case LinkKind::affine_clamped:
        detail::require(params.size() == 2, "affine_clamped needs params base,slope");
        return affine_clamped(params[0], params[1]);
      case LinkKind::beta_flat: return beta_flat(beta);
      case LinkKind::constant:
        detail::require(params.size() == 1, "constant link needs one param");
        return constant(params[0]);
    }
    throw InvalidArgument("unknown link kind");
  }

  int max_order() const {
    switch (kind) {
      case LinkKind::affine_clamped:
      case LinkKind::constant: return 64;
      default: return kMaxSmoothOrder;
    }
  }

  double value(double u) const {
    switch (kind) {
      case LinkKind::logistic: return detail::logistic(u);
      case LinkKind::probit: return 0.5 * std::erfc(-u / std::sqrt(2.0));
      case LinkKind::affine_clamped: return std::clamp(params[0] + params[1] * u, 0.0, 1.0);
      case LinkKind::beta_flat: return detail::logistic(std::pow(u, beta));
      case LinkKind::constant: return params[0];
    }
    return 0.0;
  }

  double derivative(double u, int order) const {
    if (order < 1 || order > max_order()) {
      throw InvalidArgument("link_derivative: unsupported order " + std::to_string(order) +
                            " for " + to_string(kind) + " link");
    }
    switch (kind) {
      case LinkKind::logistic: return detail::logistic_derivative(u, order);
      case LinkKind::probit: {
        const double phi = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
        const double sign = (order - 1) % 2 == 0 ? 1.0 : -1.0;
        return sign * detail::hermite_he(order - 1, u) * phi;
      }
      case LinkKind::affine_clamped: {
        if (order > 1) return 0.0;
        const double raw = params[0] + params[1] * u;
        return (raw > 0.0 && raw < 1.0) ? params[1] : 0.0;
      }
      case LinkKind::beta_flat: {
        // Faa di Bruno for Lambda(g(u)), g(u) = u^beta.
        std::vector<double> g(order);
        for (int j = 1; j <= order; ++j) {
          g[j - 1] = j <= beta ? detail::falling_factorial(beta, j) * std::pow(u, beta - j) : 0.0;
        }
        const double inner = std::pow(u, beta);
        double total = 0.0;
        for (int k = 1; k <= order; ++k) {
          const double b = detail::bell(order, k, g);
          if (b != 0.0) total += detail::logistic_derivative(inner, k) * b;
        }
        return total;
      }
      case LinkKind::constant: return 0.0;
    }
    return 0.0;
  }

  /// sigma_{Phi0} = sqrt(Phi0(0) (1 - Phi0(0)))
  double sigma() const {
    const double p = value(0.0);
    return std::sqrt(p * (1.0 - p));
  }

  /// Phi0^{(beta)}(0), the leading coefficient of the local expansion.
  double leading_derivative() const { return derivative(0.0, beta); }

  void validate() const {
    if (kind == LinkKind::constant) return;
    const double p = value(0.0);
    detail::require(p > 0.0 && p < 1.0, "link: Phi0(0) must lie strictly in (0,1)");
    detail::require(leading_derivative() > 0.0,
                    "link: derivative of order beta at 0 must be positive");
  }
};

inline double link_eval(const LinkSpec& link, double u) { return link.value(u); }

inline double link_derivative(const LinkSpec& link, double u, int order) {
  return link.derivative(u, order);
}

//==============================================================================
// Feature law P_X on [-T, T]
//==============================================================================

enum class LawKind { uniform, polynomial };

inline std::string to_string(LawKind k) {
  return k == LawKind::uniform ? "uniform" : "polynomial";
}

inline LawKind law_kind_from_string(const std::string& s) {
  if (s == "uniform") return LawKind::uniform;
  if (s == "polynomial") return LawKind::polynomial;
  throw InvalidArgument("unknown feature law '" + s + "'");
}

enum class FeatureQuantity { density, cdf, quantile, density_derivative };

/// Feature law on [-T, T]. The polynomial family has density
///   p(x) = (1 + a z + b (z^2 - 1/3)) / (2T),  z = x / T,
/// which integrates to one for all (a, b); construction rejects parameters
/// for which p is not bounded away from zero.
struct FeatureLaw {
  LawKind kind = LawKind::uniform;
  double half_width = 1.0;
  std::vector<double> params;

  static FeatureLaw uniform(double T = 1.0) {
    detail::require(T > 0.0, "feature law: half_width must be positive");
    return {LawKind::uniform, T, {}};
  }

  static FeatureLaw polynomial(double T, double a, double b) {
    detail::require(T > 0.0, "feature law: half_width must be positive");
    FeatureLaw law{LawKind::polynomial, T, {a, b}};
    detail::require(law.min_shape() > 1e-3,
                    "polynomial feature law: density must stay bounded away from 0 on [-T,T]");
    return law;
  }

  static FeatureLaw make(LawKind kind, double T, std::vector<double> params) {
    if (kind == LawKind::uniform) return uniform(T);
    detail::require(params.size() == 2, "polynomial feature law needs params a,b");
    return polynomial(T, params[0], params[1]);
  }

  double T() const { return half_width; }

  double density(double x) const {
    if (x < -half_width || x > half_width) return 0.0;
    if (kind == LawKind::uniform) return 0.5 / half_width;
    return shape(x / half_width) / (2.0 * half_width);
  }

  double density_derivative(double x) const {
    if (kind == LawKind::uniform) return 0.0;
    const double z = x / half_width;
    return (params[0] + 2.0 * params[1] * z) / (2.0 * half_width * half_width);
  }

  double cdf(double x) const {
    if (x <= -half_width) return 0.0;
    if (x >= half_width) return 1.0;
    const double z = x / half_width;
    if (kind == LawKind::uniform) return 0.5 * (z + 1.0);
    const double a = params[0];
    const double b = params[1];
    return 0.5 * ((z + 1.0) + a * (z * z - 1.0) / 2.0 + b * ((z * z * z + 1.0) / 3.0 - (z + 1.0) / 3.0));
  }

  double quantile(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw InvalidArgument("quantile argument must lie in [0,1], got " + std::to_string(s));
    }
    if (s == 0.0) return -half_width;
    if (s == 1.0) return half_width;
    if (kind == LawKind::uniform) return half_width * (2.0 * s - 1.0);
    // Safeguarded Newton on the monotone cubic.
    double lo = -half_width;
    double hi = half_width;
    double x = half_width * (2.0 * s - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double f = cdf(x) - s;
      if (f == 0.0) return x;
      if (f < 0.0) {
        lo = x;
      } else {
        hi = x;
      }
      double next = x - f / density(x);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * half_width) return next;
      x = next;
    }
    return x;
  }

  double sup_density() const {
    if (kind == LawKind::uniform) return 0.5 / half_width;
    return max_shape() / (2.0 * half_width);
  }

  double inf_density() const {
    if (kind == LawKind::uniform) return 0.5 / half_width;
    return min_shape() / (2.0 * half_width);
  }

 private:
  double shape(double z) const {
    return 1.0 + params[0] * z + params[1] * (z * z - 1.0 / 3.0);
  }

  template <class Cmp>
  double extreme_shape(Cmp better) const {
    double best = shape(-1.0);
    if (better(shape(1.0), best)) best = shape(1.0);
    if (params[1] != 0.0) {
      const double vertex = -params[0] / (2.0 * params[1]);
      if (vertex > -1.0 && vertex < 1.0 && better(shape(vertex), best)) best = shape(vertex);
    }
    return best;
  }

  double min_shape() const { return extreme_shape([](double a, double b) { return a < b; }); }
  double max_shape() const { return extreme_shape([](double a, double b) { return a > b; }); }
};

inline double feature_eval(const FeatureLaw& law, FeatureQuantity which, double u) {
  switch (which) {
    case FeatureQuantity::density: return law.density(u);
    case FeatureQuantity::cdf: return law.cdf(u);
    case FeatureQuantity::quantile: return law.quantile(u);
    case FeatureQuantity::density_derivative: return law.density_derivative(u);
  }
  return 0.0;
}

//==============================================================================
// Weak-feature-impact scenario: P(Y = 1 | X) = Phi0(delta_n X)
//==============================================================================

struct Scenario {
  LinkSpec link = LinkSpec::logistic();
  FeatureLaw law = FeatureLaw::uniform();
  double impact_scale = 1.0;     // c
  double impact_exponent = 0.0;  // gamma

  int beta() const { return link.beta; }

  void validate() const {
    detail::require(impact_scale > 0.0, "scenario: impact_scale must be positive");
    detail::require(impact_exponent >= 0.0, "scenario: impact_exponent must be nonnegative");
    link.validate();
  }

  /// delta_n = c n^{-gamma}
  double delta(double n) const { return impact_scale * std::pow(n, -impact_exponent); }

  double phi_n(double n, double x) const { return link.value(delta(n) * x); }

  /// n delta_n^{2 beta}; slow regime when this diverges.
  double regime_index(double n) const { return n * std::pow(delta(n), 2.0 * beta()); }
};

inline double phi_n(const Scenario& scn, double n, double x) { return scn.phi_n(n, x); }

//==============================================================================
// Sample
//==============================================================================

/// Binary-regression sample with distinct, strictly increasing covariates.
/// Repeated x values are stored once with their multiplicity in `weights`
/// and the number of ones among them in `ones`.
struct Sample {
  std::vector<double> xs;
  std::vector<std::int64_t> ones;
  std::vector<std::int64_t> weights;

  std::size_t blocks() const { return xs.size(); }
  bool empty() const { return xs.empty(); }

  std::int64_t size() const {
    std::int64_t n = 0;
    for (auto w : weights) n += w;
    return n;
  }

  std::int64_t total_ones() const {
    std::int64_t n = 0;
    for (auto o : ones) n += o;
    return n;
  }

  void validate() const {
    detail::require(xs.size() == ones.size() && xs.size() == weights.size(),
                    "sample: xs, ones and weights must have equal length");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      detail::require(std::isfinite(xs[i]), "sample: x values must be finite");
      if (i > 0) detail::require(xs[i] > xs[i - 1], "sample: xs must be strictly increasing");
      detail::require(weights[i] >= 1, "sample: weights must be positive");
      detail::require(ones[i] >= 0 && ones[i] <= weights[i], "sample: ones must lie in [0, weight]");
    }
  }

  /// Builds a sample from raw (x, y) pairs: sorts by x and aggregates ties.
  static Sample from_pairs(std::span<const double> x, std::span<const int> y) {
    detail::require(x.size() == y.size(), "sample: x and y lengths differ");
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    Sample s;
    for (std::size_t idx : order) {
      detail::require(y[idx] == 0 || y[idx] == 1, "sample: labels must be 0 or 1");
      detail::require(std::isfinite(x[idx]), "sample: x values must be finite");
      if (!s.xs.empty() && s.xs.back() == x[idx]) {
        s.weights.back() += 1;
        s.ones.back() += y[idx];
      } else {
        s.xs.push_back(x[idx]);
        s.weights.push_back(1);
        s.ones.push_back(y[idx]);
      }
    }
    return s;
  }
};

/// Draws n iid pairs from the scenario at sample size n: X by quantile
/// transform of uniforms, Y ~ Bernoulli(Phi_n(X)). The uniforms are sorted
/// before transformation and labels are drawn in x order, which yields the
/// same joint law as drawing pairs and sorting afterwards.
inline Sample sample_dataset(const Scenario& scn, std::int64_t n, Rng& rng) {
  detail::require(n >= 1, "sample_dataset: n must be at least 1");
  std::vector<double> x(static_cast<std::size_t>(n));
  for (auto& v : x) v = uniform01(rng);
  std::sort(x.begin(), x.end());
  for (auto& v : x) v = scn.law.quantile(v);
  if (!std::is_sorted(x.begin(), x.end())) std::sort(x.begin(), x.end());
  const double delta = scn.delta(static_cast<double>(n));
  Sample s;
  s.xs.reserve(x.size());
  s.ones.reserve(x.size());
  s.weights.reserve(x.size());
  for (double xi : x) {
    const int y = uniform01(rng) < scn.link.value(delta * xi) ? 1 : 0;
    if (!s.xs.empty() && s.xs.back() == xi) {
      s.weights.back() += 1;
      s.ones.back() += y;
    } else {
      s.xs.push_back(xi);
      s.weights.push_back(1);
      s.ones.push_back(y);
    }
  }
  return s;
}

inline Sample sample_dataset(const Scenario& scn, std::int64_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_dataset(scn, n, rng);
}

}  // namespace wfi
