#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "panelsmc/models/gompertz.hpp"
#include "panelsmc/smc.hpp"
#include "support/helpers.hpp"

using namespace panelsmc;

namespace {

// Degenerate measurement: every particle gets log-density 0.
struct ZeroMeasureModel {
  std::size_t state_dim() const { return 1; }
  std::size_t obs_dim() const { return 1; }
  const std::vector<std::string>& param_names() const {
    static const std::vector<std::string> names{"c"};
    return names;
  }
  void rinit(const double*, const CovariateTable&, double, RngStream& rng, double* x) const {
    x[0] = rng.normal();
  }
  void rprocess(double* x, double, double, const double*, const CovariateTable&,
                RngStream& rng) const {
    x[0] += rng.normal();
  }
  double dmeasure(const double*, const double*, double, std::size_t, const double*,
                  const CovariateTable&) const {
    return 0.0;
  }
  void rmeasure(const double* x, double, std::size_t, const double*, const CovariateTable&,
                RngStream&, double* y) const {
    y[0] = x[0];
  }
};

// All weights vanish at time index 2, recover afterwards.
struct FailAtTwoModel : ZeroMeasureModel {
  double dmeasure(const double*, const double*, double, std::size_t n, const double*,
                  const CovariateTable&) const {
    return n == 2 ? kNegInf : 0.0;
  }
};

UnitData flat_unit(std::size_t n_obs) {
  UnitData ud;
  ud.label = "u";
  ud.t0 = 0.0;
  for (std::size_t n = 0; n < n_obs; ++n) {
    ud.times.push_back(static_cast<double>(n + 1));
    ud.obs.push_back({0.0});
  }
  return ud;
}

std::vector<std::size_t> index_counts(const std::vector<std::uint32_t>& idx, std::size_t n) {
  std::vector<std::size_t> c(n, 0);
  for (auto i : idx) ++c.at(i);
  return c;
}

}  // namespace

TEST_CASE("log_mean_exp handles repeats, point masses, and large offsets", "[smc]") {
  const std::vector<double> rep{-3.7, -3.7};
  CHECK(log_mean_exp(rep) == -3.7);

  const std::vector<double> half{0.0, kNegInf};
  CHECK(log_mean_exp(half) == Catch::Approx(std::log(0.5)).epsilon(1e-14));

  const std::vector<double> deep{-1000.0, -1000.0, -1000.0};
  CHECK(log_mean_exp(deep) == -1000.0);

  const std::vector<double> none{kNegInf, kNegInf};
  CHECK(log_mean_exp(none) == kNegInf);

  CHECK_THROWS_AS(log_mean_exp(std::vector<double>{}), std::invalid_argument);

  const std::vector<double> two{0.0, 0.0};
  CHECK(log_sum_exp(two.data(), 2) == Catch::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("effective sample size formula", "[smc]") {
  CHECK(effective_sample_size(std::vector<double>(100, 0.01)) == Catch::Approx(100.0));
  CHECK(effective_sample_size({0.0, 1.0, 0.0}) == Catch::Approx(1.0));
  CHECK(effective_sample_size({1.0, 1.0, 2.0}) == Catch::Approx(16.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(effective_sample_size({0.0, 0.0}), std::domain_error);
}

TEST_CASE("systematic resampling with integer expected counts", "[smc]") {
  RngStream rng(derive_key(11, {stream_tag::pf}));

  auto eq = resample_systematic(std::vector<double>(4, 0.25), rng);
  std::sort(eq.begin(), eq.end());
  CHECK(eq == std::vector<std::uint32_t>{0, 1, 2, 3});

  const auto point = resample_systematic({1.0, 0.0, 0.0, 0.0}, rng);
  CHECK(point == std::vector<std::uint32_t>(4, 0));

  const auto skewed = resample_systematic({3.0, 1.0, 0.0, 0.0}, rng);
  CHECK(index_counts(skewed, 4) == std::vector<std::size_t>{3, 1, 0, 0});

  CHECK_THROWS_AS(resample_systematic({0.0, 0.0}, rng), std::domain_error);
}

TEST_CASE("systematic resampling count bounds over random weights", "[smc]") {
  RngStream rng(derive_key(12, {stream_tag::pf}));
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t J = 3 + static_cast<std::size_t>(rng.uniform01() * 40.0);
    std::vector<double> w(J);
    double total = 0.0;
    for (auto& x : w) {
      x = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01();
      total += x;
    }
    if (!(total > 0.0)) {
      w[0] = 1.0;
      total = 1.0;
    }
    const auto counts = index_counts(resample_systematic(w, rng), J);
    for (std::size_t i = 0; i < J; ++i) {
      const double expect = static_cast<double>(J) * w[i] / total;
      CHECK(static_cast<double>(counts[i]) >= std::floor(expect) - 1e-9);
      CHECK(static_cast<double>(counts[i]) <= std::ceil(expect) + 1e-9);
    }
  }
}

TEST_CASE("multinomial resampling matches the weight distribution", "[smc]") {
  RngStream rng(derive_key(13, {stream_tag::pf}));

  const auto point = resample_multinomial({0.0, 0.0, 5.0}, rng);
  CHECK(point == std::vector<std::uint32_t>(3, 2));

  const std::size_t J = 100000;
  const auto eq = resample_multinomial(std::vector<double>(J, 1.0), rng);
  const auto eq_counts = index_counts(eq, J);
  const double bound = 4.0 / std::sqrt(static_cast<double>(J));
  for (std::size_t i = 0; i < J; ++i)
    CHECK(std::abs(static_cast<double>(eq_counts[i]) / static_cast<double>(J) - 1.0e-5) <=
          bound);

  // (1,1,2)/4 target frequencies from many independent three-draw calls.
  std::vector<std::size_t> c3(3, 0);
  const std::size_t calls = 34000;
  for (std::size_t k = 0; k < calls; ++k)
    for (auto i : resample_multinomial({1.0, 1.0, 2.0}, rng)) ++c3.at(i);
  const double n = static_cast<double>(3 * calls);
  CHECK(static_cast<double>(c3[0]) / n == Catch::Approx(0.25).margin(0.01));
  CHECK(static_cast<double>(c3[1]) / n == Catch::Approx(0.25).margin(0.01));
  CHECK(static_cast<double>(c3[2]) / n == Catch::Approx(0.5).margin(0.01));

  CHECK_THROWS_AS(resample_multinomial({0.0}, rng), std::domain_error);
}

TEST_CASE("single-particle filter has unit ess everywhere", "[smc]") {
  const PanelData pd = testutil::gompertz_panel(1, 20, 901);
  const std::vector<double> p =
      unit_parameters(testutil::gompertz_truth(1), GompertzModel{}.param_names(), 0);

  FilterOptions opts;
  opts.J = 1;
  opts.seed = derive_key(901, {stream_tag::pf, 0});
  const FilterResult fr = particle_filter(GompertzModel{}, pd.unit(0), p, opts);

  REQUIRE(fr.cond_loglik.size() == 20);
  for (double e : fr.ess) CHECK(e == 1.0);
  double s = 0.0;
  for (double c : fr.cond_loglik) s += c;
  CHECK(fr.loglik == Catch::Approx(s).margin(1e-9));
}

TEST_CASE("degenerate measurement gives zero loglik and full ess", "[smc]") {
  const UnitData ud = flat_unit(12);
  const std::vector<double> p{0.0};
  FilterOptions opts;
  opts.J = 64;
  opts.seed = 5;
  const FilterResult fr = particle_filter(ZeroMeasureModel{}, ud, p, opts);
  CHECK(fr.loglik == 0.0);
  for (double e : fr.ess) CHECK(e == 64.0);
}

TEST_CASE("filter loglik agrees with the exact Gompertz likelihood", "[smc]") {
  const PanelData pd = testutil::gompertz_panel(1, 100, 321);
  const std::vector<double> p =
      unit_parameters(testutil::gompertz_truth(1), GompertzModel{}.param_names(), 0);
  const double exact = gompertz_exact_loglik(pd.unit(0), p);

  std::vector<double> lls;
  for (int r = 0; r < 10; ++r) {
    FilterOptions opts;
    opts.J = 4000;
    opts.seed = derive_key(321, {stream_tag::pf, static_cast<std::uint64_t>(r)});
    lls.push_back(particle_filter(GompertzModel{}, pd.unit(0), p, opts).loglik);
  }
  // E[log Lhat] sits below log L by about half the replicate variance
  // (second-order delta method), so allow for that on top of the MC noise.
  const double bias_allowance = 0.5 * testutil::sd(lls) * testutil::sd(lls);
  const double se = testutil::se(lls);
  CHECK(std::abs(testutil::mean(lls) - exact) <= bias_allowance + 2.0 * se + 1e-12);
}

TEST_CASE("likelihood estimate is unbiased and its log is biased down", "[smc]") {
  const PanelData pd = testutil::gompertz_panel(1, 10, 77);
  const std::vector<double> p =
      unit_parameters(testutil::gompertz_truth(1), GompertzModel{}.param_names(), 0);
  const double exact = gompertz_exact_loglik(pd.unit(0), p);

  const int R = 300;
  std::vector<double> ratios, lls;
  for (int r = 0; r < R; ++r) {
    FilterOptions opts;
    opts.J = 400;
    opts.seed = derive_key(78, {stream_tag::pf, static_cast<std::uint64_t>(r)});
    const double ll = particle_filter(GompertzModel{}, pd.unit(0), p, opts).loglik;
    lls.push_back(ll);
    ratios.push_back(std::exp(ll - exact));
  }
  CHECK(std::abs(testutil::mean(ratios) - 1.0) <= 3.0 * testutil::se(ratios));
  CHECK(testutil::mean(lls) <= exact + 2.0 * testutil::se(lls));
}

TEST_CASE("filter results are bit-identical for identical options", "[smc]") {
  const PanelData pd = testutil::gompertz_panel(2, 30, 55);
  const std::vector<double> p =
      unit_parameters(testutil::gompertz_truth(2), GompertzModel{}.param_names(), 1);

  FilterOptions opts;
  opts.J = 128;
  opts.seed = derive_key(55, {stream_tag::pf, 1});
  opts.filtered_mean = true;
  const FilterResult a = particle_filter(GompertzModel{}, pd.unit(1), p, opts);
  const FilterResult b = particle_filter(GompertzModel{}, pd.unit(1), p, opts);
  CHECK(a.loglik == b.loglik);
  CHECK(a.cond_loglik == b.cond_loglik);
  CHECK(a.ess == b.ess);
  CHECK(a.filtered_mean == b.filtered_mean);

  opts.seed = derive_key(56, {stream_tag::pf, 1});
  const FilterResult c = particle_filter(GompertzModel{}, pd.unit(1), p, opts);
  CHECK(a.loglik != c.loglik);

  for (double e : a.ess) {
    CHECK(e >= 1.0);
    CHECK(e <= 128.0);
  }
}

TEST_CASE("failure policies: error, stop with -inf, or continue uniformly", "[smc]") {
  const UnitData ud = flat_unit(5);
  const std::vector<double> p{0.0};
  FilterOptions opts;
  opts.J = 32;
  opts.seed = 9;

  SECTION("error throws with the failing time index") {
    try {
      particle_filter(FailAtTwoModel{}, ud, p, opts);
      FAIL("expected FilteringFailure");
    } catch (const FilteringFailure& e) {
      CHECK(e.time_index == 2);
    }
  }

  SECTION("neginf stops the unit early") {
    opts.failure = FailurePolicy::neginf;
    const FilterResult fr = particle_filter(FailAtTwoModel{}, ud, p, opts);
    CHECK(fr.loglik == kNegInf);
    CHECK(fr.failed());
    CHECK(fr.failed_at == 2);
    CHECK(fr.cond_loglik[2] == kNegInf);
    CHECK(fr.cond_loglik[3] == 0.0);
    CHECK(fr.cond_loglik[4] == 0.0);
    for (double e : fr.ess) CHECK(e == 32.0);
  }

  SECTION("uniform records the failure and keeps filtering") {
    opts.failure = FailurePolicy::uniform;
    const FilterResult fr = particle_filter(FailAtTwoModel{}, ud, p, opts);
    CHECK(fr.loglik == kNegInf);
    CHECK(fr.n_failures == 1);
    REQUIRE(fr.failure_times == std::vector<std::size_t>{2});
    CHECK(fr.cond_loglik[2] == kNegInf);
    CHECK(fr.cond_loglik[3] == 0.0);
    CHECK(fr.ess[2] == 32.0);
  }
}

TEST_CASE("standalone filter accounts two generations of particle slots", "[smc]") {
  const PanelData pd = testutil::gompertz_panel(1, 15, 31);
  const std::vector<double> p =
      unit_parameters(testutil::gompertz_truth(1), GompertzModel{}.param_names(), 0);
  FilterOptions opts;
  opts.J = 200;
  opts.seed = 3;
  StorageMeter meter;
  particle_filter(GompertzModel{}, pd.unit(0), p, opts, &meter);
  CHECK(meter.peak == 2 * opts.J);
  CHECK(meter.live == 0);
}
