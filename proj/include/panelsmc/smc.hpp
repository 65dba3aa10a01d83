#ifndef PANELSMC_SMC_HPP
#define PANELSMC_SMC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/model.hpp"
#include "panelsmc/panel_data.hpp"
#include "panelsmc/rng.hpp"

namespace panelsmc {

// ---- log-space arithmetic --------------------------------------------------

/// log( (1/K) sum exp(v_k) ), shifted by the max so that equal inputs are
/// exact and a common offset passes through unchanged.  -inf iff all -inf.
inline double log_mean_exp(const double* v, std::size_t k) {
  if (k == 0) throw std::invalid_argument("log_mean_exp: empty input");
  double m = kNegInf;
  for (std::size_t i = 0; i < k; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::exp(v[i] - m);
  return m + std::log(s / static_cast<double>(k));
}

inline double log_mean_exp(const std::vector<double>& v) { return log_mean_exp(v.data(), v.size()); }

inline double log_sum_exp(const double* v, std::size_t k) {
  if (k == 0) throw std::invalid_argument("log_sum_exp: empty input");
  return log_mean_exp(v, k) + std::log(static_cast<double>(k));
}

// ---- weights ---------------------------------------------------------------

/// (sum w)^2 / sum w^2.  Equals the particle count for equal weights and 1
/// for a point mass.
inline double effective_sample_size(const std::vector<double>& w) {
  double s = 0.0, s2 = 0.0;
  for (double x : w) {
    s += x;
    s2 += x * x;
  }
  if (!(s > 0.0)) throw std::domain_error("effective_sample_size: weights sum to zero");
  return s * s / s2;
}

enum class Resampler { systematic, multinomial };

/// What to do when every particle weight vanishes at some time point:
/// `error` throws, `neginf` stops the unit and reports -inf, `uniform`
/// records -inf for that time point but keeps filtering with equal
/// weights so later observations still shape the swarm.
enum class FailurePolicy { error, neginf, uniform };

/// Thrown when every particle weight vanishes and the policy is `error`.
struct FilteringFailure : std::runtime_error {
  std::size_t time_index;
  explicit FilteringFailure(std::size_t n)
      : std::runtime_error("particle filter: all weights zero at time index " +
                           std::to_string(n)),
        time_index(n) {}
};

/// Systematic resampling: one uniform positions J equally spaced points on
/// the cumulative weight scale, so each count c_i falls in
/// [floor(J wbar_i), ceil(J wbar_i)].
inline void resample_systematic(const std::vector<double>& w, RngStream& rng,
                                std::vector<std::uint32_t>& out) {
  const std::size_t j = w.size();
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw std::domain_error("resample_systematic: weights sum to zero");
  out.resize(j);
  const double step = total / static_cast<double>(j);
  double pos = rng.uniform01() * step;
  double cum = w[0];
  std::size_t i = 0;
  for (std::size_t k = 0; k < j; ++k) {
    // Index i serves points in [C_{i-1}, C_i); <= keeps zero-weight
    // particles unselectable even when pos lands exactly on a boundary.
    while (cum <= pos && i + 1 < j) cum += w[++i];
    out[k] = static_cast<std::uint32_t>(i);
    pos += step;
  }
}

/// Multinomial resampling: J i.i.d. draws from the normalized weights, as
/// in the algorithm pseudocode.
inline void resample_multinomial(const std::vector<double>& w, RngStream& rng,
                                 std::vector<std::uint32_t>& out) {
  const std::size_t j = w.size();
  double total = 0.0;
  for (double x : w) total += x;
  if (!(total > 0.0)) throw std::domain_error("resample_multinomial: weights sum to zero");
  out.resize(j);
  for (std::size_t k = 0; k < j; ++k) {
    const double u = rng.uniform01() * total;
    double cum = 0.0;
    std::size_t i = 0;
    for (; i < j; ++i) {
      cum += w[i];
      if (u < cum) break;
    }
    out[k] = static_cast<std::uint32_t>(i < j ? i : j - 1);
  }
}

inline std::vector<std::uint32_t> resample_systematic(const std::vector<double>& w,
                                                      RngStream& rng) {
  std::vector<std::uint32_t> out;
  resample_systematic(w, rng, out);
  return out;
}

inline std::vector<std::uint32_t> resample_multinomial(const std::vector<double>& w,
                                                       RngStream& rng) {
  std::vector<std::uint32_t> out;
  resample_multinomial(w, rng, out);
  return out;
}

// ---- particle accounting ---------------------------------------------------

/// Tracks concurrently allocated particle slots.  Every buffer holding one
/// generation of J particles (parameter rows, state rows, or both for the
/// same J entities) registers J slots for its lifetime; the peak
/// substantiates the claim that storage never grows with the iteration
/// count or the series length.
struct StorageMeter {
  std::size_t live = 0;
  std::size_t peak = 0;
  void acquire(std::size_t n) {
    live += n;
    if (live > peak) peak = live;
  }
  void release(std::size_t n) { live -= n; }
};

// ---- single-unit filter core -----------------------------------------------

struct UnitFilterResult {
  double loglik = 0.0;
  std::vector<double> cond_loglik;
  std::vector<double> ess;
  std::vector<std::vector<double>> filtered_mean;  // per time point, if requested
  std::size_t failed_at = npos;   // first time index with all weights zero
  std::size_t n_failures = 0;     // under `uniform`, can exceed 1
  std::vector<std::size_t> failure_times;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  bool failed() const { return failed_at != npos; }
};

/// Fixed-parameter policy: every particle sees the same natural-scale row
/// and nothing is perturbed.  Used by the standalone filter; the iterated
/// filter supplies a swarm-backed policy with the same surface.
struct FixedParams {
  const double* p = nullptr;
  static constexpr bool owns_particle_slots = false;
  void begin_unit() {}
  void step(std::size_t) {}
  const double* params(std::size_t) const { return p; }
  void reorder(const std::vector<std::uint32_t>&) {}
};

namespace detail {

/// One unit's filtering sweep, shared verbatim between the standalone
/// filter and the iterated filter so that a zero perturbation scale makes
/// the two consume their rng streams identically.
///
/// rng ordering per unit: J rinit draws, then per time point J rprocess
/// draws followed by one resampling pass.  Parameter perturbation draws
/// live inside the policy on its own stream.
template <class Model, class ParamPolicy>
UnitFilterResult filter_unit(const Model& model, const UnitData& ud, std::size_t J,
                             Resampler resampler, FailurePolicy failure, bool want_filtered_mean,
                             ParamPolicy& pp, RngStream& rng, StorageMeter* meter) {
  static_assert(UnitModelC<Model>);
  if (J < 1) throw std::invalid_argument("particle filter: J must be >= 1");
  const std::size_t S = model.state_dim();
  const std::size_t N = ud.n_obs();

  UnitFilterResult res;
  res.cond_loglik.assign(N, 0.0);
  res.ess.assign(N, static_cast<double>(J));
  if (want_filtered_mean) res.filtered_mean.assign(N, std::vector<double>(S, 0.0));

  StorageMeter local;
  StorageMeter& sm = meter ? *meter : local;
  const std::size_t owned = ParamPolicy::owns_particle_slots ? 0 : 2 * J;
  sm.acquire(owned);

  std::vector<double> x(J * S), x_next(J * S);
  std::vector<double> logw(J), w(J);
  std::vector<std::uint32_t> anc;

  pp.begin_unit();
  for (std::size_t j = 0; j < J; ++j) model.rinit(pp.params(j), ud.covariates, ud.t0, rng, &x[j * S]);

  for (std::size_t n = 0; n < N; ++n) {
    const double t_from = n == 0 ? ud.t0 : ud.times[n - 1];
    const double t_to = ud.times[n];
    pp.step(n);
    for (std::size_t j = 0; j < J; ++j)
      model.rprocess(&x[j * S], t_from, t_to, pp.params(j), ud.covariates, rng);

    double wmax = kNegInf;
    const double* y = ud.obs[n].data();
    for (std::size_t j = 0; j < J; ++j) {
      logw[j] = model.dmeasure(y, &x[j * S], t_to, n, pp.params(j), ud.covariates);
      if (logw[j] > wmax) wmax = logw[j];
    }

    double wsum = 0.0;
    if (wmax == kNegInf) {
      if (failure == FailurePolicy::error) {
        sm.release(owned);
        throw FilteringFailure(n);
      }
      res.cond_loglik[n] = kNegInf;
      if (res.failed_at == UnitFilterResult::npos) res.failed_at = n;
      ++res.n_failures;
      res.failure_times.push_back(n);
      if (failure == FailurePolicy::neginf)
        break;  // remaining cond_loglik stay 0, ess stay at the J convention
      // uniform: equal weights, ess[n] keeps its equal-weight value J
      std::fill(w.begin(), w.end(), 1.0);
      wsum = static_cast<double>(J);
    } else {
      double wsum2 = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        w[j] = std::exp(logw[j] - wmax);
        wsum += w[j];
        wsum2 += w[j] * w[j];
      }
      res.cond_loglik[n] = wmax + std::log(wsum / static_cast<double>(J));
      res.ess[n] = wsum * wsum / wsum2;
    }

    if (want_filtered_mean) {
      auto& fm = res.filtered_mean[n];
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t s = 0; s < S; ++s) fm[s] += w[j] * x[j * S + s];
      for (std::size_t s = 0; s < S; ++s) fm[s] /= wsum;
    }

    if (resampler == Resampler::systematic)
      resample_systematic(w, rng, anc);
    else
      resample_multinomial(w, rng, anc);
    for (std::size_t j = 0; j < J; ++j) {
      const double* src = &x[anc[j] * S];
      std::copy(src, src + S, &x_next[j * S]);
    }
    x.swap(x_next);
    pp.reorder(anc);
  }

  res.loglik = 0.0;
  for (double c : res.cond_loglik) res.loglik += c;
  sm.release(owned);
  return res;
}

}  // namespace detail

// ---- standalone particle filter --------------------------------------------

struct FilterOptions {
  std::size_t J = 1000;
  std::uint64_t seed = 0;  // rng stream key; use derive_key() for independent runs
  Resampler resampler = Resampler::systematic;
  FailurePolicy failure = FailurePolicy::error;
  bool filtered_mean = false;
};

using FilterResult = UnitFilterResult;

/// Bootstrap particle filter for one unit.  exp(loglik) is an unbiased
/// estimate of the unit likelihood at `params` (natural scale, model
/// order).
template <class Model>
FilterResult particle_filter(const Model& model, const UnitData& ud,
                             const std::vector<double>& params, const FilterOptions& opts,
                             StorageMeter* meter = nullptr) {
  if (params.size() != model.param_names().size())
    throw std::invalid_argument("particle_filter: parameter vector length mismatch");
  RngStream rng(opts.seed);
  FixedParams pp{params.data()};
  return detail::filter_unit(model, ud, opts.J, opts.resampler, opts.failure,
                             opts.filtered_mean, pp, rng, meter);
}

}  // namespace panelsmc

#endif  // PANELSMC_SMC_HPP
