#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <wfi/wfi.hpp>

namespace fs = std::filesystem;
using wfi::io::json;

namespace {

struct Global {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::vector<std::string> sets;
  bool check = false;
};

// Defaults, then the env seed, then the file, then flags.
wfi::RunConfig build_config(const Global& g) {
  wfi::RunConfig cfg;
  if (const char* env = std::getenv("MONOTONE_WFI_SEED"); env != nullptr && *env != '\0') {
    cfg.set("run.seed", env);
  }
  if (!g.config_path.empty()) cfg.merge(wfi::io::read_text(g.config_path));
  for (const auto& s : g.sets) cfg.set_assignment(s);
  if (g.seed) cfg.set("run.seed", std::to_string(*g.seed));
  if (g.threads) cfg.set("run.threads", std::to_string(*g.threads));
  if (!g.out.empty()) cfg.set("run.out", g.out);
  return cfg;
}

fs::path out_dir(const wfi::RunConfig& cfg) { return fs::path(cfg.text("run.out")); }

// The output location is not an input, so it stays out of the hash.
std::string config_hash(const wfi::RunConfig& cfg) {
  wfi::RunConfig hashed = cfg;
  hashed.set("run.out", "-");
  return wfi::io::fnv1a_hex(hashed.emit());
}

json manifest(const std::string& command, const wfi::RunConfig& cfg, const std::vector<wfi::Check>& checks) {
  json m;
  m["command"] = command;
  m["config_hash"] = config_hash(cfg);
  m["seed"] = cfg.seed();
  m["checks"] = wfi::io::checks_json(checks);
  m["pass"] = wfi::all_pass(checks);
  return m;
}

void report(const std::vector<wfi::Check>& checks) {
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << wfi::io::fmt(c.value) << ' ' << c.relation << ' '
              << wfi::io::fmt(c.threshold) << '\n';
  }
}

int finish(const Global& g, const std::vector<wfi::Check>& checks) {
  report(checks);
  return g.check && !wfi::all_pass(checks) ? 4 : 0;
}

//------------------------------------------------------------------------------

int cmd_fit(const Global& g, const std::string& input, std::string prefix) {
  const auto cfg = build_config(g);
  const std::string in = input.empty() ? cfg.text("fit.input") : input;
  wfi::detail::require(!in.empty(), "fit: no input CSV given");
  if (prefix.empty()) prefix = (out_dir(cfg) / cfg.text("fit.prefix")).string();
  const wfi::Sample s = wfi::io::read_sample_csv(in);
  const wfi::StepEstimate f = wfi::npmle_fit(s);
  wfi::io::write_text(prefix + ".steps.csv", wfi::io::fitted_steps_csv(f, s));
  json meta = wfi::io::steps_meta(f);
  meta["input"] = in;
  meta["rows"] = s.blocks();
  wfi::io::write_json(prefix + ".meta.json", meta);
  std::cout << "fit: " << s.size() << " observations, " << f.jump_xs.size() << " steps -> " << prefix
            << ".steps.csv\n";
  return 0;
}

int cmd_simulate_limit(const Global& g) {
  const auto cfg = build_config(g);
  const wfi::LimitRequest req = cfg.limit_request();
  const auto grid = cfg.limit_grid(req);
  const std::size_t M = cfg.count("simulate_limit.draws");
  const wfi::LimitBatch b = grid ? wfi::simulate_limit(req, M, cfg.seed(), cfg.threads(), *grid)
                                 : wfi::simulate_limit(req, M, cfg.seed(), cfg.threads());
  const fs::path dir = out_dir(cfg);
  const std::string stem = "limit_" + wfi::to_string(req.law);
  wfi::io::write_text(dir / (stem + ".csv"), wfi::io::batch_csv(b));
  json meta = wfi::io::batch_meta(b);
  meta["config_hash"] = config_hash(cfg);
  wfi::io::write_json(dir / (stem + ".json"), meta);

  wfi::svg::Axes ax{"limit draws: " + wfi::to_string(req.law), "value", "empirical CDF", false, false, {}};
  wfi::io::write_text(dir / (stem + ".svg"), wfi::svg::render(ax, {wfi::svg::ecdf_series("draws", b.draws)}));
  std::cout << "simulate-limit: " << M << " draws -> " << (dir / (stem + ".csv")).string() << '\n';
  return 0;
}

int cmd_rate_study(const Global& g) {
  const auto cfg = build_config(g);
  const auto rc = cfg.rate_study();
  const auto r = wfi::run_rate_study(rc);
  const fs::path dir = out_dir(cfg);
  wfi::io::write_text(dir / "rate_study.csv", wfi::io::rate_csv(r));

  json m = manifest("rate-study", cfg, r.checks);
  json sums = json::array();
  std::vector<wfi::svg::Series> series;
  std::vector<std::string> notes;
  std::vector<double> ns(rc.n_list.begin(), rc.n_list.end());
  for (const auto& s : r.summaries) {
    json j{{"gamma", s.gamma}, {"regime", wfi::to_string(wfi::regime_of(s.gamma, rc.scenario.beta()))},
           {"target_slope", s.target_slope}, {"median_pointwise", s.median_pointwise}, {"median_l1", s.median_l1}};
    if (s.slopes_fitted) {
      j["slope_pointwise"] = {{"value", s.pointwise.slope}, {"se", s.pointwise.se}};
      j["slope_l1"] = {{"value", s.l1.slope}, {"se", s.l1.se}};
      char buf[160];
      std::snprintf(buf, sizeof buf, "gamma=%.3g: slope %.3f (pointwise), %.3f (L1), target %.3f", s.gamma,
                    s.pointwise.slope, s.l1.slope, s.target_slope);
      notes.emplace_back(buf);
    }
    if (s.has_centering) {
      j["centering"] = {{"mean_scaled", s.centering.mean_scaled}, {"se", s.centering.se},
                        {"abs_mean", s.centering.abs_mean},       {"abs_mean_se", s.centering.abs_mean_se},
                        {"mu_n", s.centering.mu},                 {"rel_err", s.centering.rel_err}};
    }
    sums.push_back(j);
    series.push_back({"pointwise, gamma=" + wfi::io::fmt(s.gamma).substr(0, 6), ns, s.median_pointwise, false});
    series.push_back({"L1, gamma=" + wfi::io::fmt(s.gamma).substr(0, 6), ns, s.median_l1, false});
  }
  m["summaries"] = sums;
  wfi::io::write_json(dir / "rate_study.manifest.json", m);
  wfi::svg::Axes ax{"median error vs n", "n", "median error", true, true, notes};
  wfi::io::write_text(dir / "rate_study.svg", wfi::svg::render(ax, series));
  return finish(g, r.checks);
}

int cmd_limit_compare(const Global& g) {
  const auto cfg = build_config(g);
  const auto lc = cfg.limit_compare();
  const std::optional<wfi::RepresentationConfig> rep =
      lc.kind == wfi::ComparisonKind::fast_l1 ? std::optional(cfg.representation()) : std::nullopt;
  auto r = wfi::run_limit_comparison(lc);
  const fs::path dir = out_dir(cfg);
  wfi::io::write_text(dir / "limit_compare.csv", wfi::io::limit_compare_csv({r}));
  wfi::io::write_text(dir / "limit_compare.draws.csv", wfi::io::limit_draws_csv(r));
  std::vector<wfi::Check> checks = r.checks;
  json m = manifest("limit-compare", cfg, checks);
  json consts = json::object();
  for (const auto& [k, v] : r.constants) consts[k] = v;
  m["kind"] = wfi::to_string(r.kind);
  m["constants"] = consts;
  if (r.kind == wfi::ComparisonKind::boundary_pointwise) {
    m["boundary_constant_rule"] = "c = n delta_n^(2 beta) evaluated at the finite n";
  }
  if (rep) {
    const auto rr = wfi::run_representation_covariance(*rep);
    wfi::io::write_text(dir / "representation_cov.csv", wfi::io::representation_csv(rr));
    checks.insert(checks.end(), rr.checks.begin(), rr.checks.end());
    m["checks"] = wfi::io::checks_json(checks);
    m["pass"] = wfi::all_pass(checks);
  }
  wfi::io::write_json(dir / "limit_compare.manifest.json", m);

  std::vector<wfi::svg::Series> series{wfi::svg::ecdf_series("finite n", r.finite)};
  if (!r.limit.empty()) {
    series.push_back(wfi::svg::ecdf_series("limit", r.limit));
  } else {
    // slow_l1: overlay the normal limit CDF
    double sd = 1.0;
    for (const auto& [k, v] : r.constants) {
      if (k == "sigma_sq") sd = std::sqrt(v);
    }
    wfi::svg::Series s{"normal limit", {}, {}, false};
    for (int i = 0; i <= 200; ++i) {
      const double x = -4.0 * sd + 8.0 * sd * i / 200.0;
      s.xs.push_back(x);
      s.ys.push_back(wfi::normal_cdf(x, sd));
    }
    series.push_back(s);
  }
  char note[96];
  std::snprintf(note, sizeof note, "KS = %.4f", r.ks);
  wfi::svg::Axes ax{"empirical vs limit CDF: " + wfi::to_string(r.kind), "standardized statistic", "CDF", false,
                    false, {note}};
  wfi::io::write_text(dir / "limit_compare.svg", wfi::svg::render(ax, series));
  return finish(g, checks);
}

wfi::svg::Series sample_function(const std::string& label, const wfi::PiecewiseAffine& f, double T) {
  wfi::svg::Series s{label, {}, {}, false};
  std::vector<double> xs{-T, T};
  for (double k : f.knots) {
    if (k > -T && k < T) xs.push_back(k);
  }
  std::sort(xs.begin(), xs.end());
  for (double x : xs) {
    s.xs.push_back(x);
    s.ys.push_back(f(x));
  }
  return s;
}

int cmd_lower_bound_audit(const Global& g) {
  const auto cfg = build_config(g);
  const auto ac = cfg.audit();
  const auto r = wfi::run_lower_bound_audit(ac);
  const fs::path dir = out_dir(cfg);
  wfi::io::write_text(dir / "lower_bound_audit.csv", wfi::io::audit_csv(r));
  json m = manifest("lower-bound-audit", cfg, r.checks);
  json items = json::array();
  for (const auto& it : r.items) {
    items.push_back({{"name", it.name}, {"n_d2", it.n_d2}, {"alpha", it.alpha}, {"inequality", it.inequality},
                     {"membership", it.membership}});
  }
  m["items"] = items;
  m["cube"] = {{"m", r.cube.m}, {"h", r.cube.h}, {"C", r.cube.C}};
  wfi::io::write_json(dir / "lower_bound_audit.manifest.json", m);

  const double T = ac.law.T();
  std::vector<std::uint8_t> bits(r.cube.m);
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = static_cast<std::uint8_t>(k % 2);
  auto flipped = bits;
  if (!flipped.empty()) flipped[0] ^= 1u;
  std::vector<wfi::svg::Series> series{sample_function("cube member", r.cube.evaluate(bits), T),
                                       sample_function("first bit flipped", r.cube.evaluate(flipped), T)};
  wfi::svg::Axes ax{"Assouad hypotheses: on each half cell the slope is delta/2 or delta", "x", "Phi(x)", false,
                    false, {"m = " + std::to_string(r.cube.m) + " cells"}};
  wfi::io::write_text(dir / "hypotheses_cube.svg", wfi::svg::render(ax, series));
  std::vector<wfi::svg::Series> pair{sample_function("phi0", r.slow.phi0, T), sample_function("phi1", r.slow.phi1, T)};
  wfi::svg::Axes ax2{"slow-regime pointwise pair", "x", "Phi(x)", false, false, {}};
  wfi::io::write_text(dir / "hypotheses_pair.svg", wfi::svg::render(ax2, pair));
  return finish(g, r.checks);
}

int cmd_constants(const Global& g) {
  const auto cfg = build_config(g);
  const auto r = wfi::run_constants(cfg.constants());
  const fs::path dir = out_dir(cfg);
  wfi::io::write_text(dir / "constants.csv", wfi::io::constants_csv(r));
  std::string t = "a,cov,se\n";
  for (std::size_t i = 0; i < r.cov.as.size(); ++i) {
    t += wfi::io::fmt(r.cov.as[i]) + "," + wfi::io::fmt(r.cov.cov[i]) + "," + wfi::io::fmt(r.cov.cov_se[i]) + "\n";
  }
  wfi::io::write_text(dir / "constants_cov.csv", t);
  json m = manifest("constants", cfg, {});
  m["abs_mean"] = {{"value", r.abs_mean.value}, {"se", r.abs_mean.se}};
  m["cov_integral"] = {{"value", r.cov.integral.value}, {"se", r.cov.integral.se}};
  m["mu_n"] = r.mu;
  m["sigma_sq"] = r.sigma2;
  m["kappa"] = r.kappa;
  wfi::io::write_json(dir / "constants.manifest.json", m);
  wfi::svg::Axes ax{"Cov(|X(0)|, |X(a) - a|)", "a", "covariance", false, false, {}};
  wfi::io::write_text(dir / "constants_cov.svg", wfi::svg::render(ax, {{"estimate", r.cov.as, r.cov.cov, false}}));
  std::cout << "E|X(0)| = " << wfi::io::fmt(r.abs_mean.value) << " (se " << wfi::io::fmt(r.abs_mean.se) << ")\n"
            << "cov integral = " << wfi::io::fmt(r.cov.integral.value) << " (se "
            << wfi::io::fmt(r.cov.integral.se) << ")\n";
  return 0;
}

int cmd_tail_probe(const Global& g) {
  const auto cfg = build_config(g);
  const auto tc = cfg.tail_probe();
  const auto r = wfi::run_tail_bound_probe(tc);
  const fs::path dir = out_dir(cfg);
  wfi::io::write_text(dir / "tail_probe.csv", wfi::io::tail_csv(r));
  json m = manifest("tail-probe", cfg, r.checks);
  m["target_slope"] = r.target_slope;
  m["slope"] = {{"value", r.slope.slope}, {"se", r.slope.se}};
  m["medians"] = r.medians;
  wfi::io::write_json(dir / "tail_probe.manifest.json", m);
  std::vector<double> ns(tc.n_list.begin(), tc.n_list.end());
  char note[96];
  std::snprintf(note, sizeof note, "slope %.3f, target %.3f", r.slope.slope, r.target_slope);
  wfi::svg::Axes ax{"inverse-process deviation", "n", "median |U - lambda^-1|", true, true, {note}};
  wfi::io::write_text(dir / "tail_probe.svg", wfi::svg::render(ax, {{"median", ns, r.medians, false}}));
  return finish(g, r.checks);
}

int cmd_consistency(const Global& g) {
  const auto cfg = build_config(g);
  const auto cc = cfg.consistency();
  const auto r = wfi::run_consistency_study(cc);
  const fs::path dir = out_dir(cfg);
  wfi::io::write_text(dir / "consistency.csv", wfi::io::consistency_csv(cc, r));
  wfi::io::write_json(dir / "consistency.manifest.json", manifest("consistency", cfg, r.checks));
  std::vector<double> ns(cc.n_list.begin(), cc.n_list.end());
  std::vector<wfi::svg::Series> series;
  for (std::size_t i = 0; i < r.hellinger_medians.size(); ++i) {
    series.push_back({"Hellinger, gamma=" + wfi::io::fmt(cc.hellinger_gammas[i]).substr(0, 6), ns,
                      r.hellinger_medians[i], false});
  }
  for (std::size_t i = 0; i < r.sup_medians.size(); ++i) {
    series.push_back({"sup norm, gamma=" + wfi::io::fmt(cc.sup_gammas[i]).substr(0, 6), ns, r.sup_medians[i], false});
  }
  wfi::svg::Axes ax{"consistency medians", "n", "median distance", true, true, {}};
  wfi::io::write_text(dir / "consistency.svg", wfi::svg::render(ax, series));
  return finish(g, r.checks);
}

int cmd_emit_config(const Global& g) {
  std::cout << build_config(g).emit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone binary regression under weak feature impact"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--config", g.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "base seed; overrides run.seed, whose default comes from MONOTONE_WFI_SEED when set");
  app.add_option("--threads", g.threads, "worker threads, 0 = auto");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--set", g.sets, "override any field: section.key=value (repeatable)");
  app.add_flag("--check", g.check, "exit 4 when an acceptance check fails");

  std::string input;
  std::string prefix;
  auto* fit = app.add_subcommand("fit", "fit the monotone NPMLE to an x,y CSV");
  fit->add_option("input", input, "input CSV with header x,y");
  fit->add_option("--prefix", prefix, "output prefix (default <out>/<fit.prefix>)");

  auto* sim = app.add_subcommand("simulate-limit", "draw from a limit law");
  auto* rate = app.add_subcommand("rate-study", "error rates across n and gamma");
  auto* lim = app.add_subcommand("limit-compare", "finite-n statistic vs its limit law");
  auto* audit = app.add_subcommand("lower-bound-audit", "verify the minimax hypothesis budgets");
  auto* cons = app.add_subcommand("constants", "Monte Carlo Chernoff constants");
  auto* tail = app.add_subcommand("tail-probe", "inverse-process scaling probe");
  auto* consi = app.add_subcommand("consistency", "Hellinger and sup-norm consistency");
  auto* emit = app.add_subcommand("emit-config", "print the effective configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*fit) return cmd_fit(g, input, prefix);
    if (*sim) return cmd_simulate_limit(g);
    if (*rate) return cmd_rate_study(g);
    if (*lim) return cmd_limit_compare(g);
    if (*audit) return cmd_lower_bound_audit(g);
    if (*cons) return cmd_constants(g);
    if (*tail) return cmd_tail_probe(g);
    if (*consi) return cmd_consistency(g);
    if (*emit) return cmd_emit_config(g);
  } catch (const wfi::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const wfi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
