// Draws one sample from the slow regime, fits the monotone NPMLE and sets
// its rescaled pointwise error beside draws from the scaled Chernoff law.

#include <cstdio>

#include <wfi/wfi.hpp>

int main() {
  wfi::Scenario scn;
  scn.impact_exponent = 0.25;
  const std::int64_t n = 20000;
  const double nd = static_cast<double>(n);
  const double delta = scn.delta(nd);

  wfi::Rng rng(7);
  const wfi::Sample s = wfi::sample_dataset(scn, n, rng);
  const wfi::StepEstimate fit = wfi::npmle_fit(s);
  std::printf("n = %lld, delta_n = %.4f, fitted steps = %zu\n", static_cast<long long>(n), delta,
              fit.jump_xs.size());

  const double scale = std::cbrt(nd / delta);
  for (double x : {-0.5, 0.0, 0.5}) {
    const double truth = scn.phi_n(nd, x);
    std::printf("x = %+.1f  fit = %.4f  truth = %.4f  rescaled error = %+.3f\n", x, fit(x), truth,
                scale * (fit(x) - truth));
  }

  wfi::LimitRequest req;
  req.link = scn.link;
  req.features = scn.law;
  const auto batch = wfi::simulate_limit(req, 2000, 11);
  const auto ms = wfi::mean_se(batch.draws);
  std::printf("scaled Chernoff limit: kappa = %.4f, mean %.4f, sd %.4f over %zu draws\n",
              batch.params.back().second, ms.mean, ms.sd, batch.draws.size());
  return 0;
}
