#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "estimator.hpp"
#include "experiments.hpp"
#include "limits.hpp"
#include "model.hpp"

namespace wfi::io {

using json = nlohmann::ordered_json;

/// 17 significant digits: round-trips every double.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw InvalidArgument("failed writing '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

//==============================================================================
// Samples
//==============================================================================

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& field, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size()) {
    throw InvalidArgument("line " + std::to_string(line) + ": cannot parse number '" + field + "'");
  }
  return v;
}

}  // namespace detail

/// Parses `x,y` CSV text (header required, labels in {0,1}).
inline Sample parse_sample_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<double> xs;
  std::vector<int> ys;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (!header) {
      if (t != "x,y") throw InvalidArgument("line " + std::to_string(lineno) + ": expected header 'x,y'");
      header = true;
      continue;
    }
    const auto comma = t.find(',');
    if (comma == std::string::npos || t.find(',', comma + 1) != std::string::npos) {
      throw InvalidArgument("line " + std::to_string(lineno) + ": expected two comma-separated fields");
    }
    const double x = detail::parse_double(detail::trim(t.substr(0, comma)), lineno);
    const std::string yf = detail::trim(t.substr(comma + 1));
    if (yf != "0" && yf != "1") {
      throw InvalidArgument("line " + std::to_string(lineno) + ": label must be 0 or 1, got '" + yf + "'");
    }
    if (!std::isfinite(x)) throw InvalidArgument("line " + std::to_string(lineno) + ": x must be finite");
    xs.push_back(x);
    ys.push_back(yf == "1" ? 1 : 0);
  }
  if (!header) throw InvalidArgument("missing header 'x,y'");
  if (xs.empty()) throw InvalidArgument("empty sample");
  return Sample::from_pairs(xs, ys);
}

inline Sample read_sample_csv(const std::filesystem::path& path) { return parse_sample_csv(read_text(path)); }

/// One row per draw, expanded from the aggregated blocks.
inline std::string sample_csv(const Sample& s) {
  std::string out = "x,y\n";
  for (std::size_t i = 0; i < s.blocks(); ++i) {
    for (std::int64_t k = 0; k < s.weights[i]; ++k) {
      out += fmt(s.xs[i]) + (k < s.ones[i] ? ",1\n" : ",0\n");
    }
  }
  return out;
}

//==============================================================================
// Step estimates and limit batches
//==============================================================================

inline std::string steps_csv(const StepEstimate& f) {
  std::string out = "jump_x,value\n";
  for (std::size_t i = 0; i < f.jump_xs.size(); ++i) out += fmt(f.jump_xs[i]) + "," + fmt(f.values[i]) + "\n";
  return out;
}

/// One row per distinct sample point. Rows with equal consecutive values are
/// kept, so the file lists the fitted value at every observed x.
inline std::string fitted_steps_csv(const StepEstimate& f, const Sample& s) {
  std::string out = "jump_x,value\n";
  for (double x : s.xs) out += fmt(x) + "," + fmt(f(x)) + "\n";
  return out;
}

inline json steps_meta(const StepEstimate& f) {
  json j;
  j["sample_size"] = f.sample_size;
  j["jumps"] = f.jump_xs.size();
  j["extension"] =
      "right-continuous; 0 below the first jump; values[k] on [jump_x[k], jump_x[k+1]); last value from the last jump on";
  return j;
}

inline std::string batch_csv(const LimitBatch& b) {
  std::string out = "draw\n";
  for (double d : b.draws) out += fmt(d) + "\n";
  return out;
}

inline json batch_meta(const LimitBatch& b) {
  json j;
  j["law_tag"] = to_string(b.law_tag);
  j["grid"] = {{"S", b.grid.S}, {"h", b.grid.h}, {"two_sided", b.grid.two_sided}};
  json p = json::object();
  for (const auto& [k, v] : b.params) p[k] = v;
  j["params"] = p;
  j["seed"] = b.seed;
  j["streams"] = {{"first", 0}, {"last", b.draws.empty() ? 0 : b.draws.size() - 1}};
  j["draws"] = b.draws.size();
  return j;
}

//==============================================================================
// Study tables
//==============================================================================

inline std::string rate_csv(const RateStudyResult& r) {
  std::string out = "gamma,n,replicate,err_pointwise,err_l1\n";
  for (const auto& rec : r.records) {
    out += fmt(rec.gamma) + "," + std::to_string(rec.n) + "," + std::to_string(rec.replicate) + "," +
           fmt(rec.err_pointwise) + "," + fmt(rec.err_l1) + "\n";
  }
  return out;
}

inline std::string limit_compare_csv(const std::vector<LimitCompareResult>& rs) {
  std::string out = "kind,n,gamma,ks,draws_finite,draws_limit\n";
  for (const auto& r : rs) {
    out += to_string(r.kind) + "," + std::to_string(r.n) + "," + fmt(r.gamma) + "," + fmt(r.ks) + "," +
           std::to_string(r.finite.size()) + "," + std::to_string(r.limit.size()) + "\n";
  }
  return out;
}

/// Standardized finite-n statistics and limit draws, one row per value.
inline std::string limit_draws_csv(const LimitCompareResult& r) {
  std::string out = "source,value\n";
  for (double v : r.finite) out += "finite," + fmt(v) + "\n";
  for (double v : r.limit) out += "limit," + fmt(v) + "\n";
  return out;
}

inline std::string representation_csv(const RepresentationResult& r) {
  std::string out = "u,v,target,cov,se\n";
  for (const auto& c : r.cells) {
    out += fmt(c.u) + "," + fmt(c.v) + "," + fmt(c.target) + "," + fmt(c.cov) + "," + fmt(c.se) + "\n";
  }
  return out;
}

inline std::string audit_csv(const AuditResult& r) {
  std::string out = "item,n_d2,alpha,membership,inequality\n";
  for (const auto& it : r.items) {
    out += it.name + "," + fmt(it.n_d2) + "," + fmt(it.alpha) + "," + (it.membership ? "1" : "0") + ",\"" +
           it.inequality + "\"\n";
  }
  return out;
}

inline std::string tail_csv(const TailProbeResult& r) {
  std::string out = "n,x,scale,frequency\n";
  for (const auto& c : r.cells) {
    out += std::to_string(c.n) + "," + fmt(c.x) + "," + fmt(c.scale) + "," + fmt(c.frequency) + "\n";
  }
  return out;
}

inline std::string consistency_csv(const ConsistencyConfig& cfg, const ConsistencyResult& r) {
  std::string out = "metric,gamma,n,median\n";
  for (std::size_t g = 0; g < r.hellinger_medians.size(); ++g) {
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      out += "hellinger," + fmt(cfg.hellinger_gammas[g]) + "," + std::to_string(cfg.n_list[i]) + "," +
             fmt(r.hellinger_medians[g][i]) + "\n";
    }
  }
  for (std::size_t g = 0; g < r.sup_medians.size(); ++g) {
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
      out += "sup_norm," + fmt(cfg.sup_gammas[g]) + "," + std::to_string(cfg.n_list[i]) + "," +
             fmt(r.sup_medians[g][i]) + "\n";
    }
  }
  return out;
}

inline std::string constants_csv(const ConstantsResult& r) {
  std::string out = "name,value,se\n";
  out += "abs_mean," + fmt(r.abs_mean.value) + "," + fmt(r.abs_mean.se) + "\n";
  out += "cov_integral," + fmt(r.cov.integral.value) + "," + fmt(r.cov.integral.se) + "\n";
  out += "mu_n," + fmt(r.mu) + ",\n";
  out += "sigma_sq," + fmt(r.sigma2) + ",\n";
  out += "kappa," + fmt(r.kappa) + ",\n";
  return out;
}

inline json checks_json(const std::vector<Check>& cs) {
  json a = json::array();
  for (const auto& c : cs) {
    a.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold},
                 {"pass", c.pass}});
  }
  return a;
}

/// 64-bit FNV-1a of a text, hex encoded.
inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace wfi::io
