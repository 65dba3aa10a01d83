#ifndef PANELSMC_MODELS_CONTACTS_HPP
#define PANELSMC_MODELS_CONTACTS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/model.hpp"
#include "panelsmc/rng.hpp"

namespace panelsmc {

/// Episodic contact-rate model for longitudinal count panels.
///
/// A latent piecewise-constant rate X(t) holds during behavioral episodes;
/// episode boundaries arrive as a Poisson process of rate mu_R, and each
/// new episode draws an independent rate from Gamma(mean mu_X, sd sigma_X).
/// Because episode rates are i.i.d., the marginal law of X(t) is that same
/// gamma at every t, so initialization draws from it directly.
///
/// Reporting interval n (0-based) covers [t_n, t_n+1] with expected count
///   C_n = alpha^n * integral of X over the interval,
/// and Y_n | C_n ~ NegBin with mean C_n and variance C_n + C_n^2 / D,
/// where the dispersion D ~ Gamma(mean mu_D, sd sigma_D) is drawn once per
/// unit at initialization.
///
/// Time unit convention: one 6-month reporting interval has length 1, and
/// mu_R is an episode renewal rate per interval.
class ContactsModel {
 public:
  // parameter order
  static constexpr std::size_t kMuX = 0, kSigmaX = 1, kMuD = 2, kSigmaD = 3, kMuR = 4,
                               kAlpha = 5;
  // state layout: current rate, unit dispersion, integral of X over the
  // interval that ended at the current time
  static constexpr std::size_t kX = 0, kD = 1, kIntegral = 2;

  std::size_t state_dim() const { return 3; }
  std::size_t obs_dim() const { return 1; }
  static const char* id() { return "contacts"; }
  static const char* obs_column() { return "count"; }

  const std::vector<std::string>& param_names() const {
    static const std::vector<std::string> names = {"mu_X", "sigma_X", "mu_D",
                                                   "sigma_D", "mu_R", "alpha"};
    return names;
  }

  void rinit(const double* p, const CovariateTable&, double, RngStream& rng, double* x) const {
    check(p);
    x[kX] = rng.gamma_mean_sd(p[kMuX], p[kSigmaX]);
    x[kD] = rng.gamma_mean_sd(p[kMuD], p[kSigmaD]);
    x[kIntegral] = 0.0;
  }

  /// Simulates episode renewals across [t_from, t_to] and records the exact
  /// piecewise-constant integral of the rate path in the state.
  void rprocess(double* x, double t_from, double t_to, const double* p, const CovariateTable&,
                RngStream& rng) const {
    if (t_to == t_from) return;
    if (!(t_to > t_from)) throw std::domain_error("contacts: time must advance");
    check(p);
    const double len = t_to - t_from;
    const long n_renew = rng.poisson(p[kMuR] * len);
    // Renewal epochs conditional on their count are i.i.d. uniform.
    std::vector<double> epochs(static_cast<std::size_t>(n_renew));
    for (auto& e : epochs) e = t_from + len * rng.uniform01();
    std::sort(epochs.begin(), epochs.end());

    double integral = 0.0;
    double t = t_from;
    for (double e : epochs) {
      integral += x[kX] * (e - t);
      x[kX] = rng.gamma_mean_sd(p[kMuX], p[kSigmaX]);
      t = e;
    }
    integral += x[kX] * (t_to - t);
    x[kIntegral] = integral;
  }

  double dmeasure(const double* y, const double* x, double, std::size_t n, const double* p,
                  const CovariateTable&) const {
    const double c = expected_count(x[kIntegral], n, p[kAlpha]);
    return negbin_logpmf(y[0], c, x[kD]);
  }

  void rmeasure(const double* x, double, std::size_t n, const double* p, const CovariateTable&,
                RngStream& rng, double* y) const {
    const double c = expected_count(x[kIntegral], n, p[kAlpha]);
    if (c <= 0.0) {
      y[0] = 0.0;
      return;
    }
    // NegBin(mean c, size d) as a gamma-mixed Poisson.
    const double g = rng.gamma(x[kD], c / x[kD]);
    y[0] = static_cast<double>(rng.poisson(g));
  }

  static double expected_count(double integral, std::size_t n, double alpha) {
    return std::pow(alpha, static_cast<double>(n)) * integral;
  }

  /// Negative binomial log-pmf with mean c and size d (variance c + c^2/d).
  static double negbin_logpmf(double y, double c, double d) {
    if (y < 0.0 || y != std::floor(y))
      throw std::domain_error("contacts: observed count must be a nonnegative integer");
    if (!(d > 0.0)) throw std::domain_error("contacts: dispersion must be positive");
    if (c <= 0.0) return y == 0.0 ? 0.0 : kNegInf;  // point mass at zero
    return std::lgamma(y + d) - std::lgamma(d) - std::lgamma(y + 1.0) +
           d * std::log(d / (d + c)) + y * std::log(c / (d + c));
  }

 private:
  // sigma_X = 0 or sigma_D = 0 degenerate to point masses, which the limit
  // checks rely on.
  static void check(const double* p) {
    if (!(p[kMuX] > 0.0 && p[kSigmaX] >= 0.0 && p[kMuD] > 0.0 && p[kSigmaD] >= 0.0 &&
          p[kMuR] >= 0.0 && p[kAlpha] > 0.0 && p[kAlpha] <= 1.0))
      throw std::domain_error("contacts: parameters out of range");
  }
};

}  // namespace panelsmc

#endif  // PANELSMC_MODELS_CONTACTS_HPP
