#ifndef PANELSMC_MCAP_HPP
#define PANELSMC_MCAP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "panelsmc/rng.hpp"

namespace panelsmc {

/// One profile evaluation: a fixed value of the profiled parameter and a
/// Monte Carlo log-likelihood estimate.  Replicates at the same value
/// enter as separate points.
struct ProfilePoint {
  double phi = 0.0;
  double loglik = 0.0;
};

struct McapOptions {
  double lambda = 0.9;         // fraction of points in each local fit
  double confidence = 0.95;
  std::size_t grid_points = 1000;
};

struct McapResult {
  std::vector<double> grid;      // evaluation grid over the profiled range
  std::vector<double> smoothed;  // smoothed log-likelihood on the grid
  double phi_hat = 0.0;          // grid argmax of the smoothed curve
  double max_smoothed = 0.0;
  double se_stat = 0.0;  // from the local curvature
  double se_mc = 0.0;    // from the fit's coefficient covariance
  double se_total = 0.0;
  double delta = 0.0;  // cutoff below the smoothed maximum
  double lo = 0.0;
  double hi = 0.0;
  bool truncated_lo = false;  // interval ran into the profiled range edge
  bool truncated_hi = false;
  bool multiple_intervals = false;  // cutoff region was not a single interval
  std::size_t dropped_points = 0;   // non-finite evaluations excluded
  double lambda = 0.0;
  double confidence = 0.0;
};

namespace detail {

struct QuadFit {
  double a = 0.0, b = 0.0, c = 0.0;  // y ~ a + b*d + c*d^2, d = phi - x0
  double var_b = 0.0, var_c = 0.0, cov_bc = 0.0;
  std::size_t n_pos = 0;  // points with positive weight
};

/// Tricube-weighted quadratic about x0 over the q nearest points.  The
/// bandwidth is the q-th smallest distance, grown past ties at zero so
/// the fit always sees spread.
inline QuadFit local_quadratic(const std::vector<ProfilePoint>& pts, double x0, std::size_t q) {
  const std::size_t k = pts.size();
  if (q < 3) q = 3;
  if (q > k) q = k;
  std::vector<double> dist(k);
  for (std::size_t i = 0; i < k; ++i) dist[i] = std::abs(pts[i].phi - x0);
  std::vector<double> sorted = dist;
  std::sort(sorted.begin(), sorted.end());
  double dmax = sorted[q - 1];
  while (dmax == 0.0 && q < k) dmax = sorted[q++];
  if (dmax == 0.0) throw std::runtime_error("profile smoother: all points at one value");

  // weighted sums of d^j and d^j * y, with d scaled by dmax for conditioning
  double s[5] = {0, 0, 0, 0, 0};
  double t[3] = {0, 0, 0};
  QuadFit fit;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = dist[i] / dmax;
    if (r >= 1.0) continue;
    const double w = std::pow(1.0 - r * r * r, 3);
    const double d = (pts[i].phi - x0) / dmax;
    double dj = w;
    for (int j = 0; j < 5; ++j) {
      s[j] += dj;
      if (j < 3) t[j] += dj * pts[i].loglik;
      dj *= d;
    }
    ++fit.n_pos;
  }

  const double m00 = s[0], m01 = s[1], m02 = s[2];
  const double m11 = s[2], m12 = s[3], m22 = s[4];
  const double det = m00 * (m11 * m22 - m12 * m12) - m01 * (m01 * m22 - m12 * m02) +
                     m02 * (m01 * m12 - m11 * m02);
  if (!(std::abs(det) > 1e-10 * std::max(1.0, m00 * m00 * m00)))
    throw std::runtime_error("profile smoother: degenerate local fit");

  // inverse of the symmetric normal matrix via cofactors
  const double i00 = (m11 * m22 - m12 * m12) / det;
  const double i01 = (m02 * m12 - m01 * m22) / det;
  const double i02 = (m01 * m12 - m02 * m11) / det;
  const double i11 = (m00 * m22 - m02 * m02) / det;
  const double i12 = (m01 * m02 - m00 * m12) / det;
  const double i22 = (m00 * m11 - m01 * m01) / det;

  const double A = i00 * t[0] + i01 * t[1] + i02 * t[2];
  const double B = i01 * t[0] + i11 * t[1] + i12 * t[2];
  const double C = i02 * t[0] + i12 * t[1] + i22 * t[2];

  double wss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = dist[i] / dmax;
    if (r >= 1.0) continue;
    const double w = std::pow(1.0 - r * r * r, 3);
    const double d = (pts[i].phi - x0) / dmax;
    const double e = pts[i].loglik - (A + B * d + C * d * d);
    wss += w * e * e;
  }
  const double dof = static_cast<double>(fit.n_pos) - 3.0;
  const double sigma2 = dof > 0.0 ? wss / dof : 0.0;

  fit.a = A;
  fit.b = B / dmax;
  fit.c = C / (dmax * dmax);
  fit.var_b = sigma2 * i11 / (dmax * dmax);
  fit.var_c = sigma2 * i22 / (dmax * dmax * dmax * dmax);
  fit.cov_bc = sigma2 * i12 / (dmax * dmax * dmax);
  return fit;
}

}  // namespace detail

/// Confidence interval for a profiled parameter from Monte Carlo
/// profile evaluations.  The smoothed profile is cut `delta` below its
/// maximum, where delta widens the asymptotic chi-square cutoff by the
/// ratio of total to statistical variance, compensating for the Monte
/// Carlo error in the evaluations.
inline McapResult mcap(const std::vector<ProfilePoint>& points, const McapOptions& opts = {}) {
  if (!(opts.lambda > 0.0 && opts.lambda <= 1.0))
    throw std::invalid_argument("mcap: lambda must be in (0, 1]");
  if (!(opts.confidence > 0.0 && opts.confidence < 1.0))
    throw std::invalid_argument("mcap: confidence must be in (0, 1)");
  if (opts.grid_points < 2) throw std::invalid_argument("mcap: grid needs at least 2 points");

  McapResult res;
  res.lambda = opts.lambda;
  res.confidence = opts.confidence;

  std::vector<ProfilePoint> pts;
  pts.reserve(points.size());
  for (const ProfilePoint& p : points) {
    if (std::isfinite(p.phi) && std::isfinite(p.loglik))
      pts.push_back(p);
    else
      ++res.dropped_points;
  }
  std::vector<double> distinct;
  distinct.reserve(pts.size());
  for (const ProfilePoint& p : pts) distinct.push_back(p.phi);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 5)
    throw std::invalid_argument("mcap: need at least 5 distinct profile values");
  if (opts.lambda * static_cast<double>(pts.size()) < 3.0)
    throw std::invalid_argument("mcap: lambda times the point count must be at least 3");

  const double phi_lo = distinct.front(), phi_hi = distinct.back();
  const std::size_t q =
      static_cast<std::size_t>(std::ceil(opts.lambda * static_cast<double>(pts.size())));

  const std::size_t G = opts.grid_points;
  res.grid.resize(G);
  res.smoothed.resize(G);
  std::size_t best = 0;
  for (std::size_t g = 0; g < G; ++g) {
    const double x = phi_lo + (phi_hi - phi_lo) * static_cast<double>(g) /
                                  static_cast<double>(G - 1);
    res.grid[g] = x;
    res.smoothed[g] = detail::local_quadratic(pts, x, q).a;
    if (res.smoothed[g] > res.smoothed[best]) best = g;
  }
  res.phi_hat = res.grid[best];
  res.max_smoothed = res.smoothed[best];

  const detail::QuadFit fit = detail::local_quadratic(pts, res.phi_hat, q);
  if (!(fit.c < 0.0)) throw std::runtime_error("mcap: profile not locally concave at its maximum");

  res.se_stat = 1.0 / std::sqrt(-2.0 * fit.c);
  // delta-method variance of the fitted maximum -b/(2c)
  const double gb = -1.0 / (2.0 * fit.c);
  const double gc = fit.b / (2.0 * fit.c * fit.c);
  const double v_mc = gb * gb * fit.var_b + 2.0 * gb * gc * fit.cov_bc + gc * gc * fit.var_c;
  res.se_mc = v_mc > 0.0 ? std::sqrt(v_mc) : 0.0;
  res.se_total = std::sqrt(res.se_stat * res.se_stat + res.se_mc * res.se_mc);
  res.delta = 0.5 * chisq1_quantile(opts.confidence) *
              (res.se_total * res.se_total) / (res.se_stat * res.se_stat);

  const double cut = res.max_smoothed - res.delta;
  std::size_t first_in = G, last_in = 0;
  std::size_t runs = 0;
  bool inside = false;
  for (std::size_t g = 0; g < G; ++g) {
    const bool in = res.smoothed[g] >= cut;
    if (in && !inside) ++runs;
    inside = in;
    if (in) {
      if (first_in == G) first_in = g;
      last_in = g;
    }
  }
  res.multiple_intervals = runs > 1;

  if (first_in == 0) {
    res.lo = res.grid[0];
    res.truncated_lo = true;
  } else {
    const double y0 = res.smoothed[first_in - 1], y1 = res.smoothed[first_in];
    const double x0 = res.grid[first_in - 1], x1 = res.grid[first_in];
    res.lo = x0 + (cut - y0) * (x1 - x0) / (y1 - y0);
  }
  if (last_in == G - 1) {
    res.hi = res.grid[G - 1];
    res.truncated_hi = true;
  } else {
    const double y0 = res.smoothed[last_in], y1 = res.smoothed[last_in + 1];
    const double x0 = res.grid[last_in], x1 = res.grid[last_in + 1];
    res.hi = x0 + (cut - y0) * (x1 - x0) / (y1 - y0);
  }
  return res;
}

/// Equally spaced profile values over [lo, hi].
inline std::vector<double> profile_design(double lo, double hi, std::size_t k) {
  if (k < 5) throw std::invalid_argument("profile_design: need at least 5 points");
  if (!(hi > lo)) throw std::invalid_argument("profile_design: hi must exceed lo");
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
  return out;
}

}  // namespace panelsmc

#endif  // PANELSMC_MCAP_HPP
