#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"

namespace wfi {

inline double median(std::span<const double> v) {
  detail::require(!v.empty(), "median: empty input");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t m = s.size() / 2;
  return s.size() % 2 ? s[m] : 0.5 * (s[m - 1] + s[m]);
}

struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> v) {
  detail::require(v.size() >= 2, "mean_se: need at least two values");
  MeanSe r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  r.se = r.sd / std::sqrt(static_cast<double>(v.size()));
  return r;
}

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;
};

/// Ordinary least squares of log(error) on log(n).
inline SlopeFit fit_loglog_slope(std::span<const double> ns, std::span<const double> errors) {
  detail::require(ns.size() == errors.size(), "fit_loglog_slope: length mismatch");
  detail::require(ns.size() >= 3, "fit_loglog_slope: need at least 3 points");
  const std::size_t k = ns.size();
  std::vector<double> x(k);
  std::vector<double> y(k);
  for (std::size_t i = 0; i < k; ++i) {
    detail::require(ns[i] > 0.0, "fit_loglog_slope: n must be positive");
    detail::require(errors[i] > 0.0, "fit_loglog_slope: errors must be positive");
    x[i] = std::log(ns[i]);
    y[i] = std::log(errors[i]);
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  detail::require(sxx > 0.0, "fit_loglog_slope: n values must not all coincide");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    rss += r * r;
  }
  f.se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  return f;
}

/// Sample covariance and the standard error of that estimate.
struct CovSe {
  double cov = 0.0;
  double se = 0.0;
};

inline CovSe covariance(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size() && a.size() >= 2, "covariance: need matching samples of size >= 2");
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double s1 = 0.0;
  double s2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = (a[i] - ma) * (b[i] - mb);
    s1 += p;
    s2 += p * p;
  }
  const double mp = s1 / n;
  CovSe r;
  r.cov = s1 / (n - 1.0);
  r.se = std::sqrt(std::max(s2 / n - mp * mp, 0.0) / n);
  return r;
}

}  // namespace wfi
