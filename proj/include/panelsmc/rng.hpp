#ifndef PANELSMC_RNG_HPP
#define PANELSMC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <stdexcept>

namespace panelsmc {

/// Counter-based pseudo-random stream.
///
/// Each draw is a strong 64-bit hash of (key + n*gamma), so a stream is a
/// pure function of its key and an internal counter.  Independent streams
/// are obtained by deriving distinct keys with derive_key(); this is what
/// makes parallel schedules reproducible: every task hashes its own
/// coordinates into a key and consumes its private stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key), counter_(0) {}

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return counter_; }

  /// Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; safe to pass to log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no cached spare).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Gamma(shape, scale) by Marsaglia-Tsang, with the boost for shape < 1.
  double gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw std::domain_error("gamma: shape and scale must be positive");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  /// Gamma specified by mean and standard deviation; sd == 0 degenerates to
  /// a point mass at the mean.
  double gamma_mean_sd(double mean, double sd) {
    if (sd == 0.0) return mean;
    const double shape = (mean / sd) * (mean / sd);
    const double scale = sd * sd / mean;
    return gamma(shape, scale);
  }

  /// Poisson(lambda), exact for any lambda: Knuth multiplication on chunks
  /// of at most 20 (Poisson(a+b) = Poisson(a) + Poisson(b)).
  long poisson(double lambda) {
    if (lambda < 0.0) throw std::domain_error("poisson: lambda must be >= 0");
    long total = 0;
    while (lambda > 0.0) {
      const double chunk = lambda > 20.0 ? 20.0 : lambda;
      lambda -= chunk;
      const double limit = std::exp(-chunk);
      double p = 1.0;
      long k = -1;
      do {
        ++k;
        p *= uniform01();
      } while (p > limit);
      total += k;
    }
    return total;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
};

/// Derives an independent stream key from a seed and a list of task
/// coordinates (command tag, replicate, unit, ...).  Order-sensitive.
inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> ids) {
  std::uint64_t k = RngStream::mix64(seed + RngStream::kGamma);
  for (std::uint64_t id : ids) k = RngStream::mix64(k ^ RngStream::mix64(id + RngStream::kGamma));
  return k;
}

// Stream tags, one per task kind.  Keys derived with different tags never
// collide with each other in practice.
namespace stream_tag {
constexpr std::uint64_t pf = 1;
constexpr std::uint64_t pif_perturb = 2;
constexpr std::uint64_t pif_filter = 3;
constexpr std::uint64_t eval_cell = 4;
constexpr std::uint64_t start_draw = 5;
constexpr std::uint64_t simulate = 6;
constexpr std::uint64_t marginal = 7;
constexpr std::uint64_t profile = 8;
constexpr std::uint64_t search_pif = 9;
constexpr std::uint64_t search_marginal = 10;
constexpr std::uint64_t search_eval = 11;
}  // namespace stream_tag

// ---- normal distribution helpers -----------------------------------------

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// log P(a < Z <= b) for standard normal Z, stable in either tail.
inline double normal_interval_logprob(double a, double b) {
  if (!(a < b)) return -std::numeric_limits<double>::infinity();
  double p;
  if (a >= 0.0) {
    p = 0.5 * (std::erfc(a * M_SQRT1_2) - std::erfc(b * M_SQRT1_2));
  } else if (b <= 0.0) {
    p = 0.5 * (std::erfc(-b * M_SQRT1_2) - std::erfc(-a * M_SQRT1_2));
  } else {
    p = normal_cdf(b) - normal_cdf(a);
  }
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(p);
}

inline double normal_logpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

/// Inverse standard normal CDF (Acklam's rational approximation polished by
/// one Halley step; accurate to ~1e-15 over (0,1)).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement against the exact CDF.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

/// Quantile of the chi-square distribution with 1 degree of freedom.
inline double chisq1_quantile(double p) {
  const double z = normal_quantile(0.5 + 0.5 * p);
  return z * z;
}

}  // namespace panelsmc

#endif  // PANELSMC_RNG_HPP
