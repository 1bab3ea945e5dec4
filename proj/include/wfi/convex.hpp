#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace wfi {

/// Indices of the vertices of the lower convex hull of the points
/// (xs[i], ys[i]), xs strictly increasing. Single monotone-stack pass;
/// a middle point is dropped when it lies on or above the chord of its
/// neighbours (cross-product sign, no epsilon), so consecutive hull slopes
/// are strictly increasing.
inline std::vector<std::size_t> lower_hull(std::span<const double> xs, std::span<const double> ys) {
  std::vector<std::size_t> hull;
  hull.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t o = hull[hull.size() - 2];
      const std::size_t a = hull.back();
      const double cross = (xs[a] - xs[o]) * (ys[i] - ys[o]) - (ys[a] - ys[o]) * (xs[i] - xs[o]);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  return hull;
}

/// Lower hull on a uniform grid x_i = x0 + i h. Same contract as
/// lower_hull, with abscissae implied by the index.
inline std::vector<std::size_t> lower_hull_uniform(std::span<const double> ys) {
  std::vector<std::size_t> hull;
  hull.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t o = hull[hull.size() - 2];
      const std::size_t a = hull.back();
      const double cross = static_cast<double>(a - o) * (ys[i] - ys[o]) -
                           (ys[a] - ys[o]) * static_cast<double>(i - o);
      if (cross > 0.0) break;
      hull.pop_back();
    }
    hull.push_back(i);
  }
  return hull;
}

/// Hull segment (hull[k-1], hull[k]] whose half-open index interval contains
/// grid index `idx` (idx > hull.front()). Returns k.
inline std::size_t hull_segment_containing(const std::vector<std::size_t>& hull, std::size_t idx) {
  const auto it = std::lower_bound(hull.begin(), hull.end(), idx);
  if (it == hull.begin() || it == hull.end()) {
    throw InvalidArgument("hull_segment_containing: index outside the hull's domain");
  }
  return static_cast<std::size_t>(it - hull.begin());
}

/// Left derivative of the greatest convex minorant of grid values `ys`
/// (uniform step h) at grid index idx > 0.
inline double gcm_left_derivative_uniform(std::span<const double> ys, double h, std::size_t idx) {
  const auto hull = lower_hull_uniform(ys);
  const std::size_t k = hull_segment_containing(hull, idx);
  const std::size_t a = hull[k - 1];
  const std::size_t b = hull[k];
  return (ys[b] - ys[a]) / (static_cast<double>(b - a) * h);
}

}  // namespace wfi
