#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "panelsmc/mcap.hpp"
#include "panelsmc/rng.hpp"
#include "support/helpers.hpp"

using namespace panelsmc;

namespace {

std::vector<ProfilePoint> quadratic_points(double lo, double hi, std::size_t k, double center,
                                           double curv, double level, double noise_sd = 0.0,
                                           std::uint64_t seed = 1) {
  RngStream rng(derive_key(seed, {17}));
  std::vector<ProfilePoint> pts;
  for (double phi : profile_design(lo, hi, k)) {
    const double d = phi - center;
    pts.push_back({phi, level + curv * d * d + (noise_sd > 0.0 ? rng.normal(0.0, noise_sd) : 0.0)});
  }
  return pts;
}

}  // namespace

TEST_CASE("noiseless quadratic recovers the chi-square interval", "[mcap]") {
  const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -1.0, 5.0);
  const McapResult res = mcap(pts);

  const double step = 4.0 / 999.0;
  CHECK(std::abs(res.phi_hat - 2.0) <= step + 1e-12);
  CHECK(res.max_smoothed == Catch::Approx(5.0).margin(1e-6));
  CHECK(res.se_stat == Catch::Approx(1.0 / std::sqrt(2.0)).margin(1e-6));
  CHECK(res.se_mc <= 1e-6);

  // exact evaluations: the cutoff is the plain half chi-square quantile
  CHECK(res.delta == Catch::Approx(0.5 * chisq1_quantile(0.95)).margin(1e-9));
  CHECK(std::abs(res.delta - 1.92) <= 1e-3);

  const double half_width = std::sqrt(res.delta);
  CHECK(res.lo == Catch::Approx(2.0 - half_width).margin(step));
  CHECK(res.hi == Catch::Approx(2.0 + half_width).margin(step));
  CHECK_FALSE(res.truncated_lo);
  CHECK_FALSE(res.truncated_hi);
  CHECK_FALSE(res.multiple_intervals);
  CHECK(res.dropped_points == 0);
}

TEST_CASE("vertical shifts leave the interval unchanged", "[mcap]") {
  const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -1.0, 5.0, 0.3, 9);
  auto shifted = pts;
  const double c = 17.25;
  for (auto& p : shifted) p.loglik += c;

  const McapResult a = mcap(pts);
  const McapResult b = mcap(shifted);
  CHECK(b.phi_hat == a.phi_hat);
  CHECK(b.max_smoothed == Catch::Approx(a.max_smoothed + c).margin(1e-8));
  CHECK(b.delta == Catch::Approx(a.delta).margin(1e-8));
  CHECK(b.lo == Catch::Approx(a.lo).margin(1e-8));
  CHECK(b.hi == Catch::Approx(a.hi).margin(1e-8));
  CHECK(b.se_total == Catch::Approx(a.se_total).margin(1e-8));
}

TEST_CASE("horizontal shifts move the interval with the parameter", "[mcap]") {
  const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -1.0, 5.0, 0.3, 21);
  auto shifted = pts;
  const double a_shift = -3.5;
  for (auto& p : shifted) p.phi += a_shift;

  const McapResult a = mcap(pts);
  const McapResult b = mcap(shifted);
  CHECK(b.phi_hat == Catch::Approx(a.phi_hat + a_shift).margin(1e-8));
  CHECK(b.lo == Catch::Approx(a.lo + a_shift).margin(1e-8));
  CHECK(b.hi == Catch::Approx(a.hi + a_shift).margin(1e-8));
  CHECK(b.delta == Catch::Approx(a.delta).margin(1e-8));
}

TEST_CASE("noisy evaluations widen the cutoff and still cover", "[mcap]") {
  const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -1.0, 5.0, 0.1, 33);
  const McapResult res = mcap(pts);
  CHECK(res.se_mc > 0.0);
  CHECK(res.se_total >= res.se_stat);
  CHECK(res.delta >= 0.5 * chisq1_quantile(0.95) - 1e-12);
  CHECK(res.lo < 2.0);
  CHECK(res.hi > 2.0);
}

TEST_CASE("replicated profile values are accepted", "[mcap]") {
  RngStream rng(derive_key(3, {18}));
  std::vector<ProfilePoint> pts;
  for (double phi : profile_design(1.0, 3.0, 10))
    for (int rep = 0; rep < 3; ++rep)
      pts.push_back({phi, -(phi - 2.0) * (phi - 2.0) + rng.normal(0.0, 0.05)});
  const McapResult res = mcap(pts);
  CHECK(res.phi_hat == Catch::Approx(2.0).margin(0.3));
  CHECK(res.lo < res.hi);
}

TEST_CASE("input validation and failure modes", "[mcap]") {
  SECTION("too few distinct profile values") {
    std::vector<ProfilePoint> pts;
    for (double phi : {1.0, 2.0, 3.0, 4.0})
      for (int rep = 0; rep < 2; ++rep) pts.push_back({phi, -phi * phi});
    CHECK_THROWS_AS(mcap(pts), std::invalid_argument);
  }
  SECTION("lambda too small for the point count") {
    const auto pts = quadratic_points(0.0, 4.0, 5, 2.0, -1.0, 0.0);
    McapOptions opts;
    opts.lambda = 0.5;
    CHECK_THROWS_AS(mcap(pts, opts), std::invalid_argument);
  }
  SECTION("lambda and confidence ranges") {
    const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -1.0, 0.0);
    McapOptions opts;
    opts.lambda = 0.0;
    CHECK_THROWS_AS(mcap(pts, opts), std::invalid_argument);
    opts.lambda = 1.5;
    CHECK_THROWS_AS(mcap(pts, opts), std::invalid_argument);
    opts.lambda = 0.9;
    opts.confidence = 1.0;
    CHECK_THROWS_AS(mcap(pts, opts), std::invalid_argument);
    opts.confidence = 0.95;
    opts.grid_points = 1;
    CHECK_THROWS_AS(mcap(pts, opts), std::invalid_argument);
  }
  SECTION("convex profile is rejected at the maximum") {
    const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, 1.0, 0.0);
    CHECK_THROWS_AS(mcap(pts), std::runtime_error);
  }
}

TEST_CASE("intervals truncate at the profiled range", "[mcap]") {
  SECTION("maximum at the right edge") {
    const auto pts = quadratic_points(0.0, 4.0, 30, 10.0, -1.0, 0.0);
    const McapResult res = mcap(pts);
    CHECK(res.truncated_hi);
    CHECK_FALSE(res.truncated_lo);
    CHECK(res.hi == 4.0);
    CHECK(res.lo == Catch::Approx(10.0 - std::sqrt(36.0 + res.delta)).margin(0.01));
  }
  SECTION("flat profile overruns both edges") {
    const auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -0.001, 0.0);
    const McapResult res = mcap(pts);
    CHECK(res.truncated_lo);
    CHECK(res.truncated_hi);
    CHECK(res.lo == 0.0);
    CHECK(res.hi == 4.0);
    CHECK_FALSE(res.multiple_intervals);
  }
}

TEST_CASE("a deep bimodal profile reports multiple intervals", "[mcap]") {
  std::vector<ProfilePoint> pts;
  for (double phi : profile_design(-2.0, 2.0, 81)) {
    const double w = phi * phi - 1.0;
    pts.push_back({phi, -5.0 * w * w});
  }
  McapOptions opts;
  opts.lambda = 0.25;
  const McapResult res = mcap(pts, opts);
  CHECK(res.multiple_intervals);
  CHECK(std::abs(std::abs(res.phi_hat) - 1.0) < 0.1);
}

TEST_CASE("non-finite evaluations are dropped, not fatal", "[mcap]") {
  auto pts = quadratic_points(0.0, 4.0, 30, 2.0, -1.0, 5.0);
  const McapResult clean = mcap(pts);
  pts.push_back({1.5, std::numeric_limits<double>::quiet_NaN()});
  pts.push_back({std::numeric_limits<double>::infinity(), 0.0});
  const McapResult res = mcap(pts);
  CHECK(res.dropped_points == 2);
  CHECK(res.phi_hat == clean.phi_hat);
  CHECK(res.lo == Catch::Approx(clean.lo).margin(1e-12));
}

TEST_CASE("profile designs are inclusive equal-spaced grids", "[mcap]") {
  const auto d = profile_design(0.5, 2.5, 5);
  REQUIRE(d.size() == 5);
  CHECK(d.front() == 0.5);
  CHECK(d.back() == 2.5);
  CHECK(d[2] == Catch::Approx(1.5).margin(1e-12));
  CHECK_THROWS_AS(profile_design(0.0, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(profile_design(1.0, 1.0, 5), std::invalid_argument);
}
