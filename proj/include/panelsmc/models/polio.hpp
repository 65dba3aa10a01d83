#ifndef PANELSMC_MODELS_POLIO_HPP
#define PANELSMC_MODELS_POLIO_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/bspline.hpp"
#include "panelsmc/model.hpp"
#include "panelsmc/rng.hpp"

namespace panelsmc {

/// Monthly polio transmission model.
///
/// State (9 components): six one-month susceptible baby cohorts S_B1..S_B6,
/// infected babies I_B, susceptible older individuals S_O, infected older
/// individuals I_O; the recovered class is implicit.  Time is measured in
/// years with one state update per month.  Covariates: monthly `births` and
/// `population`.
///
/// Monthly step t -> t + 1/12:
///   seasonality   beta(t) = exp(sum_k b_k xi_k(t)), periodic cubic
///                 B-splines xi_1..xi_6 over the year
///   mean force    lambda_bar = beta(t) (I_B + I_O) / P(t) + psi   [yr^-1]
///   noise         eps ~ Gamma(mean 1, var sigma_env^2 + sigma_dem^2 / lambda_bar),
///                 skipped when lambda_bar = 0
///   force         lambda = lambda_bar * eps
///   survive       p = exp(-(delta + lambda)/12),  infect q = (1-p) lambda/(lambda+delta)
///   update        I_B' = q sum_k S_Bk;  S_B1' = B(t+1/12);  S_Bk' = p S_B(k-1);
///                 I_O' = q S_O;  S_O' = p (S_O + S_B6)
///
/// Measurement at month n: Y = max{round(Z), 0} with
/// Z ~ N(rho I_O, rho I_O + (tau I_O)^2), evaluated as a discretized normal
/// truncated at zero.
///
/// Initialization at t0: S_Bk = births at t0 - (k-1)/12 (six pre-period
/// months of births required), I_B = 0, S_O = P(t0) * S_O_frac,
/// I_O = P(t0) * I_O_frac, deterministically.
class PolioModel {
 public:
  static constexpr double kDelta = 1.0 / 60.0;  // mortality rate, yr^-1
  static constexpr double kMonth = 1.0 / 12.0;

  // parameter order: shared block then unit block
  static constexpr std::size_t kRho = 0, kSigmaDem = 1, kPsi = 2, kTau = 3;
  static constexpr std::size_t kB1 = 4;  // b1..b6 occupy 4..9
  static constexpr std::size_t kSigmaEnv = 10, kSO0 = 11, kIO0 = 12;

  // state layout
  static constexpr std::size_t kSB = 0;  // S_B1..S_B6 occupy 0..5
  static constexpr std::size_t kIB = 6, kSO = 7, kIO = 8;

  std::size_t state_dim() const { return 9; }
  std::size_t obs_dim() const { return 1; }
  static const char* id() { return "polio"; }
  static const char* obs_column() { return "cases"; }

  const std::vector<std::string>& param_names() const {
    static const std::vector<std::string> names = {
        "rho", "sigma_dem", "psi", "tau", "b1", "b2", "b3",
        "b4",  "b5",        "b6",  "sigma_env", "S_O0", "I_O0"};
    return names;
  }

  void rinit(const double* p, const CovariateTable& cov, double t0, RngStream&,
             double* x) const {
    for (int k = 0; k < 6; ++k) {
      double b;
      try {
        b = cov.interpolate("births", t0 - static_cast<double>(k) * kMonth);
      } catch (const std::out_of_range&) {
        throw std::runtime_error(
            "polio: births covariate must cover the 6 months preceding t0");
      }
      if (b < 0.0) throw std::domain_error("polio: negative births covariate");
      x[kSB + static_cast<std::size_t>(k)] = b;  // S_B(k+1) = births (k) months back
    }
    const double pop = cov.interpolate("population", t0);
    if (!(pop > 0.0)) throw std::domain_error("polio: population must be positive");
    x[kIB] = 0.0;
    x[kSO] = pop * p[kSO0];
    x[kIO] = pop * p[kIO0];
  }

  void rprocess(double* x, double t_from, double t_to, const double* p,
                const CovariateTable& cov, RngStream& rng) const {
    if (t_to == t_from) return;
    long months = std::lround((t_to - t_from) * 12.0);
    if (months < 0 || std::abs((t_to - t_from) * 12.0 - static_cast<double>(months)) > 1e-6)
      throw std::domain_error("polio: observation spacing must be a whole number of months");
    for (long i = 0; i < months; ++i)
      step_month(x, t_from + static_cast<double>(i) * kMonth, p, cov, rng);
  }

  double dmeasure(const double* y, const double* x, double, std::size_t, const double* p,
                  const CovariateTable&) const {
    return case_count_logprob(y[0], p[kRho], p[kTau], x[kIO]);
  }

  void rmeasure(const double* x, double, std::size_t, const double* p, const CovariateTable&,
                RngStream& rng, double* y) const {
    const double m = p[kRho] * x[kIO];
    const double s2 = p[kRho] * x[kIO] + (p[kTau] * x[kIO]) * (p[kTau] * x[kIO]);
    const double z = s2 > 0.0 ? rng.normal(m, std::sqrt(s2)) : m;
    y[0] = std::max(0.0, std::round(z));
  }

  /// log P(Y = y) for the discretized zero-truncated normal measurement.
  static double case_count_logprob(double y, double rho, double tau, double io) {
    if (y < 0.0 || y != std::floor(y))
      throw std::domain_error("polio: observed case count must be a nonnegative integer");
    const double m = rho * io;
    const double s2 = rho * io + (tau * io) * (tau * io);
    if (s2 <= 0.0) return y == 0.0 ? 0.0 : kNegInf;  // point mass at zero
    const double s = std::sqrt(s2);
    if (y == 0.0) return normal_interval_logprob(kNegInf, (0.5 - m) / s);
    return normal_interval_logprob((y - 0.5 - m) / s, (y + 0.5 - m) / s);
  }

 private:
  void step_month(double* x, double t, const double* p, const CovariateTable& cov,
                  RngStream& rng) const {
    const double pop = cov.interpolate("population", t);
    const double births_next = cov.interpolate("births", t + kMonth);
    if (pop <= 0.0 || births_next < 0.0)
      throw std::domain_error("polio: covariates must be positive population, nonnegative births");

    const auto xi = periodic_bspline_basis(t);
    double log_beta = 0.0;
    for (std::size_t k = 0; k < 6; ++k) log_beta += p[kB1 + k] * xi[k];
    const double lambda_bar = std::exp(log_beta) * (x[kIB] + x[kIO]) / pop + p[kPsi];

    double lambda = 0.0;
    if (lambda_bar > 0.0) {
      const double var = p[kSigmaEnv] * p[kSigmaEnv] + p[kSigmaDem] * p[kSigmaDem] / lambda_bar;
      const double eps = var > 0.0 ? rng.gamma_mean_sd(1.0, std::sqrt(var)) : 1.0;
      lambda = lambda_bar * eps;
    }

    const double surv = std::exp(-(kDelta + lambda) * kMonth);
    const double infect = lambda + kDelta > 0.0 ? (1.0 - surv) * lambda / (lambda + kDelta) : 0.0;

    double sb_total = 0.0;
    for (std::size_t k = 0; k < 6; ++k) sb_total += x[kSB + k];
    const double sb6 = x[kSB + 5];

    x[kIB] = infect * sb_total;
    for (std::size_t k = 5; k >= 1; --k) x[kSB + k] = surv * x[kSB + k - 1];
    x[kSB] = births_next;
    x[kIO] = infect * x[kSO];
    x[kSO] = surv * (x[kSO] + sb6);
  }
};

}  // namespace panelsmc

#endif  // PANELSMC_MODELS_POLIO_HPP
