#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "panelsmc/rng.hpp"

using namespace panelsmc;

TEST_CASE("streams are pure functions of key and counter", "[rng]") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());

  RngStream c(42);
  std::vector<double> first;
  for (int i = 0; i < 10; ++i) first.push_back(c.uniform01());
  RngStream d(42);
  for (int i = 0; i < 10; ++i) REQUIRE(d.uniform01() == first[i]);
}

TEST_CASE("distinct keys give distinct sequences", "[rng]") {
  RngStream a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  REQUIRE(same == 0);
}

TEST_CASE("derive_key separates coordinates and orders", "[rng]") {
  const std::uint64_t k1 = derive_key(7, {1, 2, 3});
  const std::uint64_t k2 = derive_key(7, {1, 2, 4});
  const std::uint64_t k3 = derive_key(7, {3, 2, 1});
  const std::uint64_t k4 = derive_key(8, {1, 2, 3});
  REQUIRE(k1 != k2);
  REQUIRE(k1 != k3);
  REQUIRE(k1 != k4);
  REQUIRE(derive_key(7, {1, 2, 3}) == k1);
}

TEST_CASE("uniform01 is in [0,1) with correct first moments", "[rng]") {
  RngStream r(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sumsq += u * u;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(mean == Catch::Approx(0.5).margin(0.005));
  REQUIRE(var == Catch::Approx(1.0 / 12.0).margin(0.005));
}

TEST_CASE("normal consumes exactly two uniforms and has N(0,1) moments", "[rng]") {
  RngStream r(99);
  (void)r.normal();
  REQUIRE(r.draws() == 2);
  (void)r.normal();
  REQUIRE(r.draws() == 4);

  RngStream s(100);
  const int n = 200000;
  double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    m1 += x;
    m2 += x * x;
    m3 += x * x * x;
    m4 += x * x * x * x;
  }
  m1 /= n; m2 /= n; m3 /= n; m4 /= n;
  REQUIRE(m1 == Catch::Approx(0.0).margin(0.01));
  REQUIRE(m2 == Catch::Approx(1.0).margin(0.02));
  REQUIRE(m3 == Catch::Approx(0.0).margin(0.05));
  REQUIRE(m4 == Catch::Approx(3.0).margin(0.1));
}

TEST_CASE("gamma moments match shape/scale on both sides of shape=1", "[rng]") {
  for (double shape : {0.4, 2.5}) {
    const double scale = 1.7;
    RngStream r(derive_key(5, {static_cast<std::uint64_t>(shape * 10)}));
    const int n = 400000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
      const double x = r.gamma(shape, scale);
      REQUIRE(x > 0.0);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE(mean == Catch::Approx(shape * scale).epsilon(0.02));
    REQUIRE(var == Catch::Approx(shape * scale * scale).epsilon(0.05));
  }
}

TEST_CASE("gamma_mean_sd matches requested mean and sd; sd=0 is exact", "[rng]") {
  RngStream r(314);
  REQUIRE(r.gamma_mean_sd(2.5, 0.0) == 2.5);
  REQUIRE(r.draws() == 0);

  const double mu = 3.0, sd = 0.8;
  const int n = 300000;
  double sum = 0, sumsq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.gamma_mean_sd(mu, sd);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  REQUIRE(mean == Catch::Approx(mu).epsilon(0.01));
  REQUIRE(std::sqrt(var) == Catch::Approx(sd).epsilon(0.03));
}

TEST_CASE("poisson is exact for small and chunked large rates", "[rng]") {
  for (double lambda : {0.3, 4.0, 87.5}) {
    RngStream r(derive_key(11, {static_cast<std::uint64_t>(lambda * 10)}));
    const int n = 200000;
    double sum = 0, sumsq = 0;
    for (int i = 0; i < n; ++i) {
      const long k = r.poisson(lambda);
      REQUIRE(k >= 0);
      sum += k;
      sumsq += static_cast<double>(k) * k;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    REQUIRE(mean == Catch::Approx(lambda).epsilon(0.02));
    REQUIRE(var == Catch::Approx(lambda).epsilon(0.05));
  }
  RngStream r(1);
  REQUIRE(r.poisson(0.0) == 0);
}

TEST_CASE("normal_cdf matches reference values", "[rng]") {
  REQUIRE(normal_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(normal_cdf(1.0) == Catch::Approx(0.841344746068543).margin(1e-12));
  REQUIRE(normal_cdf(-1.959963984540054) == Catch::Approx(0.025).margin(1e-12));
}

TEST_CASE("normal_interval_logprob is finite in far tails and symmetric", "[rng]") {
  const double far = normal_interval_logprob(38.0, 39.0);
  REQUIRE(std::isfinite(far));
  REQUIRE(far < -700.0);
  REQUIRE(normal_interval_logprob(-39.0, -38.0) == Catch::Approx(far).epsilon(1e-12));

  const double mid = normal_interval_logprob(-1.0, 1.0);
  REQUIRE(mid == Catch::Approx(std::log(0.682689492137086)).margin(1e-12));

  REQUIRE(std::isinf(normal_interval_logprob(2.0, 2.0)));
  REQUIRE(normal_interval_logprob(2.0, 1.0) < 0.0);
}

TEST_CASE("normal_quantile inverts normal_cdf", "[rng]") {
  for (double p : {1e-10, 1e-4, 0.025, 0.5, 0.9, 0.975, 1.0 - 1e-6}) {
    REQUIRE(normal_cdf(normal_quantile(p)) == Catch::Approx(p).epsilon(1e-9));
  }
  REQUIRE(chisq1_quantile(0.95) == Catch::Approx(3.841458820694124).margin(1e-9));
}
