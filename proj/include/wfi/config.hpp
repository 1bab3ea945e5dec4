#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "error.hpp"
#include "experiments.hpp"
#include "limits.hpp"
#include "model.hpp"

namespace wfi {

enum class FieldKind { real, integer, unsigned_integer, boolean, text, real_list, integer_list };

struct FieldSpec {
  std::string section;
  std::string key;
  FieldKind kind;
  std::string fallback;
};

namespace detail {

inline std::string canonical_real(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (strip(s).empty()) return out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(strip(item));
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw InvalidArgument("config " + key + ": expected a finite number, got '" + v + "'");
  }
  return out;
}

inline std::int64_t parse_integer(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw InvalidArgument("config " + key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw InvalidArgument("config " + key + ": expected a nonnegative integer, got '" + v + "'");
  }
  return out;
}

inline std::string canonicalize(const FieldSpec& f, const std::string& raw) {
  const std::string key = f.section + "." + f.key;
  const std::string v = strip(raw);
  switch (f.kind) {
    case FieldKind::real: return canonical_real(parse_real(key, v));
    case FieldKind::integer: return std::to_string(parse_integer(key, v));
    case FieldKind::unsigned_integer: return std::to_string(parse_unsigned(key, v));
    case FieldKind::boolean:
      if (v == "true" || v == "1") return "true";
      if (v == "false" || v == "0") return "false";
      throw InvalidArgument("config " + key + ": expected true or false, got '" + v + "'");
    case FieldKind::text: return v;
    case FieldKind::real_list: {
      std::string out;
      for (const auto& item : split_list(v)) out += (out.empty() ? "" : ",") + canonical_real(parse_real(key, item));
      return out;
    }
    case FieldKind::integer_list: {
      std::string out;
      for (const auto& item : split_list(v)) out += (out.empty() ? "" : ",") + std::to_string(parse_integer(key, item));
      return out;
    }
  }
  return v;
}

}  // namespace detail

/// Every configurable field, in emission order.
inline const std::vector<FieldSpec>& config_schema() {
  using K = FieldKind;
  static const std::vector<FieldSpec> schema{
      {"run", "seed", K::unsigned_integer, "20240601"},
      {"run", "threads", K::unsigned_integer, "1"},
      {"run", "out", K::text, "out"},

      {"scenario", "link", K::text, "logistic"},
      {"scenario", "beta", K::integer, "1"},
      {"scenario", "link_params", K::real_list, ""},
      {"scenario", "law", K::text, "uniform"},
      {"scenario", "half_width", K::real, "1"},
      {"scenario", "law_params", K::real_list, ""},
      {"scenario", "impact_scale", K::real, "1"},
      {"scenario", "impact_exponent", K::real, "0.25"},
      {"scenario", "x0", K::real, "0"},

      {"fit", "input", K::text, ""},
      {"fit", "prefix", K::text, "fit"},

      {"simulate_limit", "law", K::text, "scaled_chernoff"},
      {"simulate_limit", "draws", K::unsigned_integer, "1000"},
      {"simulate_limit", "c", K::real, "0"},
      {"simulate_limit", "grid_half_width", K::real, "0"},
      {"simulate_limit", "grid_step", K::real, "0"},

      {"rate_study", "gammas", K::real_list, "0,0.25,0.8"},
      {"rate_study", "n_list", K::integer_list, "512,1024,2048,4096,8192,16384,32768"},
      {"rate_study", "replicates", K::unsigned_integer, "400"},
      {"rate_study", "centering_check", K::boolean, "false"},
      {"rate_study", "abs_mean_draws", K::unsigned_integer, "20000"},

      {"limit_compare", "kind", K::text, "slow_pointwise"},
      {"limit_compare", "n", K::integer, "20000"},
      {"limit_compare", "replicates", K::unsigned_integer, "2000"},
      {"limit_compare", "limit_draws", K::unsigned_integer, "50000"},
      {"limit_compare", "constants_draws", K::unsigned_integer, "20000"},
      {"limit_compare", "representation_replicates", K::unsigned_integer, "50000"},
      {"limit_compare", "representation_us", K::real_list, "0.1,0.3,0.5,0.7,0.9"},

      {"lower_bound_audit", "n_fast", K::integer, "400"},
      {"lower_bound_audit", "delta_fast", K::real, "0.001"},
      {"lower_bound_audit", "C_fast", K::real, "0.4"},
      {"lower_bound_audit", "n_slow", K::integer, "10000"},
      {"lower_bound_audit", "delta_slow", K::real, "0.1"},
      {"lower_bound_audit", "C_slow", K::real, "0"},
      {"lower_bound_audit", "n_cube", K::integer, "1000000"},
      {"lower_bound_audit", "delta_cube", K::real, "0.1"},
      {"lower_bound_audit", "C_cube", K::real, "0"},

      {"tail_probe", "n_list", K::integer_list, "1024,2048,4096,8192,16384,32768,65536"},
      {"tail_probe", "x_list", K::real_list, "0.02,0.05,0.1"},
      {"tail_probe", "replicates", K::unsigned_integer, "400"},

      {"consistency", "hellinger_gammas", K::real_list, "0"},
      {"consistency", "sup_gammas", K::real_list, "0.25,0.8"},
      {"consistency", "n_list", K::integer_list, "400,800,1600,3200,6400"},
      {"consistency", "replicates", K::unsigned_integer, "200"},

      {"constants", "n", K::integer, "40000"},
      {"constants", "abs_mean_draws", K::unsigned_integer, "20000"},
      {"constants", "cov_draws", K::unsigned_integer, "20000"},
      {"constants", "a_max", K::real, "4"},
      {"constants", "a_step", K::real, "0.25"},

      {"tolerances", "rate_slope", K::real, "0.07"},
      {"tolerances", "centering", K::real, "0.1"},
      {"tolerances", "ks", K::real, "0.1"},
      {"tolerances", "representation_se", K::real, "3"},
      {"tolerances", "audit_quadrature", K::real, "1e-08"},
      {"tolerances", "tail_slope", K::real, "0.1"},
      {"tolerances", "hellinger_ratio", K::real, "0.55"},
      {"tolerances", "quadrature_abs", K::real, "1e-10"},
  };
  return schema;
}

/// Flat `section.key -> canonical value` map over the schema.
class RunConfig {
 public:
  RunConfig() {
    for (const auto& f : config_schema()) values_[f.section + "." + f.key] = detail::canonicalize(f, f.fallback);
  }

  static RunConfig parse(const std::string& text) {
    RunConfig cfg;
    cfg.merge(text);
    return cfg;
  }

  /// Applies every key of an INI text on top of the current values.
  void merge(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw InvalidArgument("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree) {
      if (!body.data().empty()) throw InvalidArgument("config: key '" + section + "' must sit inside a section");
      const bool known = std::any_of(config_schema().begin(), config_schema().end(),
                                     [&](const FieldSpec& f) { return f.section == section; });
      if (!known) throw InvalidArgument("unknown config section '" + section + "'");
      for (const auto& [key, value] : body) set(section + "." + key, value.get_value<std::string>());
    }
  }

  /// Overrides one field; `key` is `section.key`.
  void set(const std::string& key, const std::string& value) {
    const FieldSpec& f = spec(key);
    values_[key] = detail::canonicalize(f, value);
  }

  /// Parses `section.key=value`.
  void set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw InvalidArgument("override '" + assignment + "' must look like section.key=value");
    set(detail::strip(assignment.substr(0, eq)), assignment.substr(eq + 1));
  }

  std::string emit() const {
    std::string out;
    std::string section;
    for (const auto& f : config_schema()) {
      if (f.section != section) {
        out += (section.empty() ? "[" : "\n[") + f.section + "]\n";
        section = f.section;
      }
      out += f.key + " = " + values_.at(f.section + "." + f.key) + "\n";
    }
    return out;
  }

  const std::string& text(const std::string& key) const {
    spec(key);
    return values_.at(key);
  }
  double real(const std::string& key) const { return detail::parse_real(key, text(key)); }
  std::int64_t integer(const std::string& key) const { return detail::parse_integer(key, text(key)); }
  std::uint64_t unsigned_integer(const std::string& key) const { return detail::parse_unsigned(key, text(key)); }
  std::size_t count(const std::string& key) const { return static_cast<std::size_t>(unsigned_integer(key)); }
  bool boolean(const std::string& key) const { return text(key) == "true"; }
  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : detail::split_list(text(key))) out.push_back(detail::parse_real(key, s));
    return out;
  }
  std::vector<std::int64_t> integers(const std::string& key) const {
    std::vector<std::int64_t> out;
    for (const auto& s : detail::split_list(text(key))) out.push_back(detail::parse_integer(key, s));
    return out;
  }

  std::uint64_t seed() const { return unsigned_integer("run.seed"); }
  unsigned threads() const { return static_cast<unsigned>(unsigned_integer("run.threads")); }

  //--------------------------------------------------------------------------
  // Typed views
  //--------------------------------------------------------------------------

  Scenario scenario() const {
    Scenario s;
    s.link = LinkSpec::make(link_kind_from_string(text("scenario.link")), static_cast<int>(integer("scenario.beta")),
                            reals("scenario.link_params"));
    s.law = FeatureLaw::make(law_kind_from_string(text("scenario.law")), real("scenario.half_width"),
                             reals("scenario.law_params"));
    s.impact_scale = real("scenario.impact_scale");
    s.impact_exponent = real("scenario.impact_exponent");
    s.validate();
    return s;
  }

  double x0() const { return real("scenario.x0"); }

  QuadratureCfg quadrature() const {
    QuadratureCfg q;
    q.abs_tol = real("tolerances.quadrature_abs");
    q.validate();
    return q;
  }

  LimitRequest limit_request() const {
    const Scenario s = scenario();
    LimitRequest r;
    r.law = limit_law_from_string(text("simulate_limit.law"));
    r.link = s.link;
    r.features = s.law;
    r.x0 = x0();
    r.c = real("simulate_limit.c");
    if (!(s.law.cdf(r.x0) > 0.0 && s.law.cdf(r.x0) < 1.0)) throw InvalidArgument("x0 must be interior");
    if (r.c < 0.0) throw InvalidArgument("simulate_limit.c must be nonnegative");
    return r;
  }

  /// Grid override for simulate-limit; nullopt keeps the law's default.
  std::optional<PathGrid> limit_grid(const LimitRequest& req) const {
    const double S = real("simulate_limit.grid_half_width");
    const double h = real("simulate_limit.grid_step");
    if (S == 0.0 && h == 0.0) return std::nullopt;
    PathGrid g = default_grid(req);
    if (S != 0.0) g.S = S;
    if (h != 0.0) g.h = h;
    g.validate();
    return g;
  }

  RateStudyConfig rate_study() const {
    RateStudyConfig c;
    c.scenario = scenario();
    c.gammas = reals("rate_study.gammas");
    c.n_list = integers("rate_study.n_list");
    c.M = count("rate_study.replicates");
    c.x0 = x0();
    c.seed = seed();
    c.threads = threads();
    c.slope_tol = real("tolerances.rate_slope");
    c.centering_check = boolean("rate_study.centering_check");
    c.centering_tol = real("tolerances.centering");
    c.abs_mean_draws = count("rate_study.abs_mean_draws");
    c.quadrature = quadrature();
    c.validate();
    return c;
  }

  LimitCompareConfig limit_compare() const {
    LimitCompareConfig c;
    c.scenario = scenario();
    c.kind = comparison_kind_from_string(text("limit_compare.kind"));
    c.n = integer("limit_compare.n");
    c.M = count("limit_compare.replicates");
    c.limit_M = count("limit_compare.limit_draws");
    c.x0 = x0();
    c.seed = seed();
    c.threads = threads();
    c.ks_tol = real("tolerances.ks");
    c.constants_M = count("limit_compare.constants_draws");
    c.validate();
    return c;
  }

  RepresentationConfig representation() const {
    RepresentationConfig c;
    c.scenario = scenario();
    c.n = integer("limit_compare.n");
    c.M = count("limit_compare.representation_replicates");
    c.us = reals("limit_compare.representation_us");
    c.seed = seed();
    c.threads = threads();
    c.se_multiple = real("tolerances.representation_se");
    c.validate();
    return c;
  }

  AuditConfig audit() const {
    const Scenario s = scenario();
    AuditConfig c;
    c.law = s.law;
    c.x0 = x0();
    c.n_fast = integer("lower_bound_audit.n_fast");
    c.delta_fast = real("lower_bound_audit.delta_fast");
    c.C_fast = real("lower_bound_audit.C_fast");
    c.n_slow = integer("lower_bound_audit.n_slow");
    c.delta_slow = real("lower_bound_audit.delta_slow");
    c.C_slow = real("lower_bound_audit.C_slow");
    c.n_cube = integer("lower_bound_audit.n_cube");
    c.delta_cube = real("lower_bound_audit.delta_cube");
    c.C_cube = real("lower_bound_audit.C_cube");
    c.quad_tol = real("tolerances.audit_quadrature");
    c.validate();
    return c;
  }

  TailProbeConfig tail_probe() const {
    TailProbeConfig c;
    c.scenario = scenario();
    c.n_list = integers("tail_probe.n_list");
    c.x_list = reals("tail_probe.x_list");
    c.M = count("tail_probe.replicates");
    c.x0 = x0();
    c.seed = seed();
    c.threads = threads();
    c.slope_tol = real("tolerances.tail_slope");
    c.validate();
    return c;
  }

  ConsistencyConfig consistency() const {
    ConsistencyConfig c;
    c.scenario = scenario();
    c.hellinger_gammas = reals("consistency.hellinger_gammas");
    c.sup_gammas = reals("consistency.sup_gammas");
    c.n_list = integers("consistency.n_list");
    c.M = count("consistency.replicates");
    c.seed = seed();
    c.threads = threads();
    c.hellinger_ratio_tol = real("tolerances.hellinger_ratio");
    c.validate();
    return c;
  }

  ConstantsConfig constants() const {
    ConstantsConfig c;
    c.scenario = scenario();
    c.n = integer("constants.n");
    c.abs_mean_M = count("constants.abs_mean_draws");
    c.cov_M = count("constants.cov_draws");
    c.a_max = real("constants.a_max");
    c.a_step = real("constants.a_step");
    c.seed = seed();
    c.threads = threads();
    detail::require(c.n >= 1, "constants: n must be positive");
    detail::require(c.abs_mean_M >= 2 && c.cov_M >= 2, "constants: need at least two draws");
    detail::require(c.a_max > 0.0 && c.a_step > 0.0 && c.a_step <= c.a_max,
                    "constants: need 0 < a_step <= a_max");
    return c;
  }

 private:
  static const FieldSpec& spec(const std::string& key) {
    for (const auto& f : config_schema()) {
      if (f.section + "." + f.key == key) return f;
    }
    throw InvalidArgument("unknown config key '" + key + "'");
  }

  std::map<std::string, std::string> values_;
};

}  // namespace wfi
