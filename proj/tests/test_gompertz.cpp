#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "panelsmc/models/gompertz.hpp"
#include "panelsmc/smc.hpp"
#include "support/helpers.hpp"

using namespace panelsmc;

namespace {

std::vector<double> gparams(double kappa, double r, double sigmaG, double tau, double x0) {
  return {kappa, r, sigmaG, tau, x0};
}

const CovariateTable kNoCov;

double ks_statistic_normal(std::vector<double> xs, double mean, double sd) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf((xs[i] - mean) / sd);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

}  // namespace

TEST_CASE("gompertz map fixes kappa=X=1 when noiseless", "[gompertz]") {
  const GompertzModel m;
  RngStream rng(1);
  double x = 1.0;
  m.rprocess(&x, 0.0, 1.0, gparams(1.0, 0.37, 0.0, 0.1, 1.0).data(), kNoCov, rng);
  CHECK(x == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("gompertz map jumps to kappa at large r", "[gompertz]") {
  const GompertzModel m;
  RngStream rng(1);
  double x = 2.0;
  m.rprocess(&x, 0.0, 1.0, gparams(3.0, 50.0, 0.0, 0.1, 1.0).data(), kNoCov, rng);
  CHECK(std::abs(x - 3.0) < 1e-9);
}

TEST_CASE("gompertz one-step transition is lognormal with the stated moments", "[gompertz]") {
  const GompertzModel m;
  const double kappa = 2.0, r = 0.3, sigmaG = 0.25, x0 = 0.7;
  const auto p = gparams(kappa, r, sigmaG, 0.1, 1.0);
  const double a = std::exp(-r);
  const double mean = a * std::log(x0) + (1.0 - a) * std::log(kappa);

  RngStream rng(derive_key(41, {stream_tag::simulate}));
  std::vector<double> draws(100000);
  for (auto& z : draws) {
    double x = x0;
    m.rprocess(&x, 0.0, 1.0, p.data(), kNoCov, rng);
    z = std::log(x);
  }
  // Kolmogorov-Smirnov against N(mean, sigmaG), 1% critical value.
  const double d = ks_statistic_normal(std::move(draws), mean, sigmaG);
  CHECK(d < 1.628 / std::sqrt(100000.0));
}

TEST_CASE("gompertz process rejects bad state and identity holds at zero steps",
          "[gompertz]") {
  const GompertzModel m;
  RngStream rng(1);
  const auto p = gparams(1.0, 0.1, 0.1, 0.1, 1.0);
  double x = 1.7;
  m.rprocess(&x, 2.0, 2.0, p.data(), kNoCov, rng);
  CHECK(x == 1.7);
  x = -1.0;
  CHECK_THROWS_AS(m.rprocess(&x, 0.0, 1.0, p.data(), kNoCov, rng), std::domain_error);
  x = 1.0;
  CHECK_THROWS_AS(m.rprocess(&x, 0.0, 1.5, p.data(), kNoCov, rng), std::domain_error);
}

TEST_CASE("gompertz measurement density at its median", "[gompertz]") {
  const GompertzModel m;
  const double X = 2.5;
  const auto p = gparams(1.0, 0.1, 0.1, 1.0, 1.0);
  const double y = X;
  const double got = m.dmeasure(&y, &X, 1.0, 0, p.data(), kNoCov);
  CHECK(got == Catch::Approx(-std::log(X) - 0.5 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("gompertz measurement density vanishes in the left tail", "[gompertz]") {
  const GompertzModel m;
  const double X = 1.0;
  const auto p = gparams(1.0, 0.1, 0.1, 0.1, 1.0);
  const double tiny = 1e-300, zero = 0.0;
  CHECK(m.dmeasure(&tiny, &X, 1.0, 0, p.data(), kNoCov) < -100.0);
  CHECK(m.dmeasure(&zero, &X, 1.0, 0, p.data(), kNoCov) == kNegInf);
}

TEST_CASE("gompertz measurement density integrates to one", "[gompertz]") {
  const GompertzModel m;
  const double X = 1.0, tau = 0.1;
  const auto p = gparams(1.0, 0.1, 0.1, tau, 1.0);
  // Simpson's rule over +-8 tau on the log scale.
  const double lo = std::exp(-8.0 * tau), hi = std::exp(8.0 * tau);
  const std::size_t K = 4000;
  const double h = (hi - lo) / static_cast<double>(K);
  double integral = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    const double y = lo + h * static_cast<double>(k);
    const double f = std::exp(m.dmeasure(&y, &X, 1.0, 0, p.data(), kNoCov));
    integral += f * (k == 0 || k == K ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0));
  }
  integral *= h / 3.0;
  CHECK(integral == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("exact loglik with degenerate latent path", "[gompertz]") {
  const double tau = 0.2;
  const auto p = gparams(1.0, 0.4, 0.0, tau, 1.0);
  UnitData ud;
  ud.t0 = 0.0;
  ud.times = {1.0, 2.0, 3.0, 4.0};
  ud.obs = {{1.1}, {0.8}, {1.05}, {0.97}};

  double expect = 0.0;
  for (const auto& y : ud.obs) expect += normal_logpdf(std::log(y[0]), 0.0, tau) - std::log(y[0]);
  CHECK(gompertz_exact_loglik(ud, p) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("exact loglik single observation closed form", "[gompertz]") {
  const double kappa = 2.0, r = 0.3, sigmaG = 0.2, tau = 0.15, x0 = 0.6;
  const auto p = gparams(kappa, r, sigmaG, tau, x0);
  UnitData ud;
  ud.t0 = 0.0;
  ud.times = {1.0};
  ud.obs = {{1.3}};

  const double a = std::exp(-r);
  const double mean = a * std::log(x0) + (1.0 - a) * std::log(kappa);
  const double sd = std::sqrt(sigmaG * sigmaG + tau * tau);
  const double expect = normal_logpdf(std::log(1.3), mean, sd) - std::log(1.3);
  CHECK(gompertz_exact_loglik(ud, p) == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("exact loglik rejects non-positive data", "[gompertz]") {
  const auto p = gparams(1.0, 0.1, 0.1, 0.1, 1.0);
  UnitData ud;
  ud.t0 = 0.0;
  ud.times = {1.0};
  ud.obs = {{0.0}};
  CHECK_THROWS_AS(gompertz_exact_loglik(ud, p), std::domain_error);
}

TEST_CASE("exact loglik is consistent under a common log shift", "[gompertz]") {
  RngStream rng(derive_key(42, {stream_tag::simulate}));
  for (int trial = 0; trial < 5; ++trial) {
    const double c = rng.uniform(-1.0, 1.0);
    const double kappa = std::exp(rng.uniform(-0.5, 0.5));
    const double x0 = std::exp(rng.uniform(-0.5, 0.5));
    const auto p = gparams(kappa, 0.2, 0.15, 0.1, x0);

    UnitData ud;
    ud.t0 = 0.0;
    const std::size_t N = 12;
    for (std::size_t n = 0; n < N; ++n) {
      ud.times.push_back(static_cast<double>(n + 1));
      ud.obs.push_back({std::exp(rng.uniform(-0.4, 0.4))});
    }
    UnitData shifted = ud;
    for (auto& y : shifted.obs) y[0] *= std::exp(c);
    const auto ps = gparams(kappa * std::exp(c), 0.2, 0.15, 0.1, x0 * std::exp(c));

    const double base = gompertz_exact_loglik(ud, p);
    const double moved = gompertz_exact_loglik(shifted, ps);
    CHECK(moved == Catch::Approx(base - c * static_cast<double>(N)).margin(1e-9));
  }
}

TEST_CASE("simulate then filter gives a finite loglik at the truth", "[gompertz]") {
  const PanelData pd = testutil::gompertz_panel(2, 25, 1234);
  const ParameterSet truth = testutil::gompertz_truth(2);
  for (std::size_t u = 0; u < 2; ++u) {
    FilterOptions opts;
    opts.J = 300;
    opts.seed = derive_key(1234, {stream_tag::pf, u});
    const auto fr = particle_filter(GompertzModel{}, pd.unit(u),
                                    unit_parameters(truth, GompertzModel{}.param_names(), u),
                                    opts);
    CHECK(std::isfinite(fr.loglik));
  }
}
