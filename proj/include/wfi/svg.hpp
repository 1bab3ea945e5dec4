#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace wfi::svg {

struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  bool steps = false;  // draw as a right-continuous staircase
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<std::string> notes;  // lines printed in the top-left corner
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colors[i % 6];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Renders line series on linear or logarithmic axes as a standalone SVG.
inline std::string render(const Axes& ax, const std::vector<Series>& series) {
  constexpr double W = 640.0;
  constexpr double H = 420.0;
  constexpr double L = 70.0;
  constexpr double R = 20.0;
  constexpr double T = 40.0;
  constexpr double B = 55.0;
  auto tx = [&](double v) { return ax.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return ax.log_y ? std::log10(v) : v; };

  double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
  for (const auto& s : series) {
    wfi::detail::require(s.xs.size() == s.ys.size(), "svg: series length mismatch");
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if ((ax.log_x && s.xs[i] <= 0.0) || (ax.log_y && s.ys[i] <= 0.0)) continue;
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      x_lo = std::min(x_lo, tx(s.xs[i]));
      x_hi = std::max(x_hi, tx(s.xs[i]));
      y_lo = std::min(y_lo, ty(s.ys[i]));
      y_hi = std::max(y_hi, ty(s.ys[i]));
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double ypad = 0.05 * (y_hi - y_lo);
  y_lo -= ypad;
  y_hi += ypad;

  auto px = [&](double v) { return L + (tx(v) - x_lo) / (x_hi - x_lo) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y_lo) / (y_hi - y_lo) * (H - T - B); };

  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\" "
       "font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"420\" fill=\"#ffffff\"/>\n";
  o += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + detail::escape(ax.title) + "</text>\n";
  o += "<rect x=\"" + detail::num(L) + "\" y=\"" + detail::num(T) + "\" width=\"" + detail::num(W - L - R) +
       "\" height=\"" + detail::num(H - T - B) + "\" fill=\"none\" stroke=\"#333333\"/>\n";

  // five ticks per axis, in transformed units
  for (int k = 0; k <= 4; ++k) {
    const double u = x_lo + (x_hi - x_lo) * k / 4.0;
    const double v = ax.log_x ? std::pow(10.0, u) : u;
    const double p = L + (u - x_lo) / (x_hi - x_lo) * (W - L - R);
    o += "<line x1=\"" + detail::num(p) + "\" y1=\"" + detail::num(H - B) + "\" x2=\"" + detail::num(p) +
         "\" y2=\"" + detail::num(H - B + 5) + "\" stroke=\"#333333\"/>\n";
    o += "<text x=\"" + detail::num(p) + "\" y=\"" + detail::num(H - B + 18) + "\" text-anchor=\"middle\">" +
         detail::tick(v) + "</text>\n";
    const double uy = y_lo + (y_hi - y_lo) * k / 4.0;
    const double vy = ax.log_y ? std::pow(10.0, uy) : uy;
    const double q = H - B - (uy - y_lo) / (y_hi - y_lo) * (H - T - B);
    o += "<line x1=\"" + detail::num(L - 5) + "\" y1=\"" + detail::num(q) + "\" x2=\"" + detail::num(L) +
         "\" y2=\"" + detail::num(q) + "\" stroke=\"#333333\"/>\n";
    o += "<text x=\"" + detail::num(L - 8) + "\" y=\"" + detail::num(q + 4) + "\" text-anchor=\"end\">" +
         detail::tick(vy) + "</text>\n";
  }
  o += "<text x=\"" + detail::num(L + (W - L - R) / 2) + "\" y=\"" + detail::num(H - 12) +
       "\" text-anchor=\"middle\">" + detail::escape(ax.x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + detail::num(T + (H - T - B) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       detail::num(T + (H - T - B) / 2) + ")\">" + detail::escape(ax.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::string pts;
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      if ((ax.log_x && s.xs[i] <= 0.0) || (ax.log_y && s.ys[i] <= 0.0)) continue;
      if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
      if (s.steps && !pts.empty()) pts += detail::num(px(s.xs[i])) + "," + detail::num(py(s.ys[i - 1])) + " ";
      pts += detail::num(px(s.xs[i])) + "," + detail::num(py(s.ys[i])) + " ";
    }
    if (!pts.empty()) pts.pop_back();
    o += "<polyline fill=\"none\" stroke=\"" + std::string(detail::palette(si)) + "\" stroke-width=\"1.6\" points=\"" +
         pts + "\"/>\n";
    if (!s.steps && s.xs.size() <= 40) {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        if ((ax.log_x && s.xs[i] <= 0.0) || (ax.log_y && s.ys[i] <= 0.0)) continue;
        o += "<circle cx=\"" + detail::num(px(s.xs[i])) + "\" cy=\"" + detail::num(py(s.ys[i])) + "\" r=\"2.5\" fill=\"" +
             detail::palette(si) + "\"/>\n";
      }
    }
    const double ly = T + 16.0 + 16.0 * static_cast<double>(si);
    o += "<line x1=\"" + detail::num(W - R - 170) + "\" y1=\"" + detail::num(ly - 4) + "\" x2=\"" +
         detail::num(W - R - 150) + "\" y2=\"" + detail::num(ly - 4) + "\" stroke=\"" + detail::palette(si) +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + detail::num(W - R - 145) + "\" y=\"" + detail::num(ly) + "\">" + detail::escape(s.label) +
         "</text>\n";
  }
  for (std::size_t i = 0; i < ax.notes.size(); ++i) {
    o += "<text x=\"" + detail::num(L + 8) + "\" y=\"" + detail::num(T + 16 + 15 * static_cast<double>(i)) +
         "\" fill=\"#333333\">" + detail::escape(ax.notes[i]) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

/// Empirical CDF of a sample as a staircase series.
inline Series ecdf_series(std::string label, std::span<const double> v) {
  Series s;
  s.label = std::move(label);
  s.steps = true;
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  // thin large samples to at most ~800 vertices
  const std::size_t stride = std::max<std::size_t>(1, (sorted.size() + 799) / 800);
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); i += stride) {
    s.xs.push_back(sorted[i]);
    s.ys.push_back(static_cast<double>(i + 1) / n);
  }
  if (!sorted.empty() && s.xs.back() != sorted.back()) {
    s.xs.push_back(sorted.back());
    s.ys.push_back(1.0);
  }
  return s;
}

}  // namespace wfi::svg
