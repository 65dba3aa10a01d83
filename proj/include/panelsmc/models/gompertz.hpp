#ifndef PANELSMC_MODELS_GOMPERTZ_HPP
#define PANELSMC_MODELS_GOMPERTZ_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/model.hpp"
#include "panelsmc/rng.hpp"

namespace panelsmc {

/// Stochastic Gompertz population model with lognormal measurement error.
///
///   X_{n+1} = kappa^(1-exp(-r)) * X_n^exp(-r) * eps,   log eps ~ N(0, sigmaG^2)
///   log Y_n ~ N(log X_n, tau^2)
///
/// One map application per unit of time; observation spacings must be whole
/// numbers of steps.  kappa, r, X0 are strictly positive; sigmaG and tau
/// may be zero, which degenerates the corresponding noise to a point mass.
class GompertzModel {
 public:
  // parameter order
  static constexpr std::size_t kKappa = 0, kR = 1, kSigmaG = 2, kTau = 3, kX0 = 4;

  std::size_t state_dim() const { return 1; }
  std::size_t obs_dim() const { return 1; }
  static const char* id() { return "gompertz"; }
  static const char* obs_column() { return "y"; }

  const std::vector<std::string>& param_names() const {
    static const std::vector<std::string> names = {"kappa", "r", "sigmaG", "tau", "X0"};
    return names;
  }

  void rinit(const double* p, const CovariateTable&, double, RngStream&, double* x) const {
    if (!(p[kX0] > 0.0)) throw std::domain_error("gompertz: X0 must be positive");
    x[0] = p[kX0];
  }

  void rprocess(double* x, double t_from, double t_to, const double* p, const CovariateTable&,
                RngStream& rng) const {
    const long k = steps_between(t_from, t_to);
    if (k == 0) return;
    if (!(x[0] > 0.0)) throw std::domain_error("gompertz: state must be positive");
    check(p);
    const double a = std::exp(-p[kR]);
    const double logkappa = std::log(p[kKappa]);
    double z = std::log(x[0]);
    for (long i = 0; i < k; ++i) z = a * z + (1.0 - a) * logkappa + p[kSigmaG] * rng.normal();
    x[0] = std::exp(z);
  }

  double dmeasure(const double* y, const double* x, double, std::size_t, const double* p,
                  const CovariateTable&) const {
    if (!(y[0] > 0.0)) return kNegInf;
    check(p);
    if (p[kTau] == 0.0) return y[0] == x[0] ? std::numeric_limits<double>::infinity() : kNegInf;
    return normal_logpdf(std::log(y[0]), std::log(x[0]), p[kTau]) - std::log(y[0]);
  }

  void rmeasure(const double* x, double, std::size_t, const double* p, const CovariateTable&,
                RngStream& rng, double* y) const {
    y[0] = std::exp(std::log(x[0]) + p[kTau] * rng.normal());
  }

  /// Number of map applications covering [t_from, t_to]; spacing must be
  /// integral.
  static long steps_between(double t_from, double t_to) {
    const double dt = t_to - t_from;
    const long k = std::lround(dt);
    if (std::abs(dt - static_cast<double>(k)) > 1e-9 || k < 0)
      throw std::domain_error("gompertz: observation spacing must be a whole number of steps");
    return k;
  }

 private:
  static void check(const double* p) {
    if (!(p[kKappa] > 0.0 && p[kR] > 0.0 && p[kSigmaG] >= 0.0 && p[kTau] >= 0.0))
      throw std::domain_error("gompertz: kappa, r must be > 0 and sigmaG, tau >= 0");
  }
};

/// Exact log-likelihood of one Gompertz unit via the Kalman filter on
/// Z = log X, plus the Jacobian sum(-log y_n) that converts the log-data
/// density back to the data scale.
///
///   Z_{k+1} = a Z_k + (1-a) log kappa + N(0, sigmaG^2),   a = exp(-r)
///   log y_n = Z_n + N(0, tau^2),  Z at t0 a point mass at log X0
inline double gompertz_exact_loglik(const UnitData& ud, const std::vector<double>& p) {
  using M = GompertzModel;
  if (!(p[M::kKappa] > 0.0 && p[M::kR] > 0.0 && p[M::kX0] > 0.0))
    throw std::domain_error("gompertz: kappa, r, X0 must be positive");
  const double a = std::exp(-p[M::kR]);
  const double s2 = p[M::kSigmaG] * p[M::kSigmaG];
  const double tau2 = p[M::kTau] * p[M::kTau];
  const double logkappa = std::log(p[M::kKappa]);

  double mean = std::log(p[M::kX0]);
  double var = 0.0;
  double loglik = 0.0;
  for (std::size_t n = 0; n < ud.n_obs(); ++n) {
    const double t_prev = n == 0 ? ud.t0 : ud.times[n - 1];
    const long k = M::steps_between(t_prev, ud.times[n]);
    // k-step propagation in closed form
    const double ak = std::pow(a, static_cast<double>(k));
    mean = ak * mean + (1.0 - ak) * logkappa;
    var = ak * ak * var + (a == 1.0 ? static_cast<double>(k) * s2
                                    : s2 * (1.0 - std::pow(a, 2.0 * k)) / (1.0 - a * a));

    const double yn = ud.obs[n][0];
    if (!(yn > 0.0)) throw std::domain_error("gompertz exact loglik: data must be positive");
    const double z = std::log(yn);
    const double S = var + tau2;
    if (!(S > 0.0))
      throw std::domain_error("gompertz exact loglik: degenerate observation variance");
    loglik += normal_logpdf(z, mean, std::sqrt(S)) - z;
    const double gain = var / S;
    mean += gain * (z - mean);
    var *= 1.0 - gain;
  }
  return loglik;
}

}  // namespace panelsmc

#endif  // PANELSMC_MODELS_GOMPERTZ_HPP
