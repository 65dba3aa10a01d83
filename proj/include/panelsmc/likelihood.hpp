#ifndef PANELSMC_LIKELIHOOD_HPP
#define PANELSMC_LIKELIHOOD_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/model.hpp"
#include "panelsmc/panel_data.hpp"
#include "panelsmc/parallel.hpp"
#include "panelsmc/params.hpp"
#include "panelsmc/smc.hpp"

namespace panelsmc {

/// Per-unit, per-replicate log-likelihood estimates from independent
/// particle filters, all at one parameter value.
struct ReplicateMatrix {
  std::size_t n_units = 0;
  std::size_t n_reps = 0;
  std::vector<double> logliks;  // row-major: entry(u, r)
  std::size_t J = 0;
  std::uint64_t seed = 0;

  struct Warning {
    std::size_t unit, replicate, time_index;
  };
  std::vector<Warning> warnings;  // filters that failed (entry is -inf)

  double& entry(std::size_t u, std::size_t r) { return logliks[u * n_reps + r]; }
  double entry(std::size_t u, std::size_t r) const { return logliks[u * n_reps + r]; }
  const double* row(std::size_t u) const { return &logliks[u * n_reps]; }
};

/// Log unit-likelihood means: out[u] = log (1/R) sum_r exp(entry(u,r)).
inline std::vector<double> log_row_means(const ReplicateMatrix& m) {
  std::vector<double> out(m.n_units);
  for (std::size_t u = 0; u < m.n_units; ++u) out[u] = log_mean_exp(m.row(u), m.n_reps);
  return out;
}

/// Product over units of per-unit replicate means (the lower-variance
/// combiner; the default everywhere).
inline double combine_product_of_means(const ReplicateMatrix& m) {
  double total = 0.0;
  for (double v : log_row_means(m)) total += v;
  return total;
}

/// Mean over replicates of the product over units.
inline double combine_mean_of_products(const ReplicateMatrix& m) {
  std::vector<double> colsum(m.n_reps, 0.0);
  for (std::size_t r = 0; r < m.n_reps; ++r)
    for (std::size_t u = 0; u < m.n_units; ++u) colsum[r] += m.entry(u, r);
  return log_mean_exp(colsum);
}

/// Jackknife standard error of combine_product_of_means over replicates.
/// Zero when R = 1 (a single replicate carries no spread information).
inline double jackknife_se_product_of_means(const ReplicateMatrix& m) {
  const std::size_t r_total = m.n_reps;
  if (r_total < 2) return 0.0;
  std::vector<double> loo(r_total, 0.0);
  std::vector<double> rest(r_total - 1);
  for (std::size_t drop = 0; drop < r_total; ++drop) {
    double total = 0.0;
    for (std::size_t u = 0; u < m.n_units; ++u) {
      std::size_t k = 0;
      for (std::size_t r = 0; r < r_total; ++r)
        if (r != drop) rest[k++] = m.entry(u, r);
      total += log_mean_exp(rest.data(), rest.size());
    }
    loo[drop] = total;
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(r_total);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(r_total - 1) / static_cast<double>(r_total));
}

/// Same leave-one-replicate-out construction for combine_mean_of_products.
inline double jackknife_se_mean_of_products(const ReplicateMatrix& m) {
  const std::size_t r_total = m.n_reps;
  if (r_total < 2) return 0.0;
  std::vector<double> colsum(r_total, 0.0);
  for (std::size_t r = 0; r < r_total; ++r)
    for (std::size_t u = 0; u < m.n_units; ++u) colsum[r] += m.entry(u, r);
  std::vector<double> loo(r_total, 0.0);
  std::vector<double> rest(r_total - 1);
  for (std::size_t drop = 0; drop < r_total; ++drop) {
    std::size_t k = 0;
    for (std::size_t r = 0; r < r_total; ++r)
      if (r != drop) rest[k++] = colsum[r];
    loo[drop] = log_mean_exp(rest.data(), rest.size());
  }
  double mean = 0.0;
  for (double v : loo) mean += v;
  mean /= static_cast<double>(r_total);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(ss * static_cast<double>(r_total - 1) / static_cast<double>(r_total));
}

/// Runs R independent particle filters per unit with streams keyed by
/// (seed, unit, replicate), so any (u, r) cell can be computed on any
/// worker with the same result.  Failed filters record -inf plus a
/// warning rather than aborting the evaluation.
template <class Model>
ReplicateMatrix replicated_eval(const Model& model, const PanelData& data,
                                const ParameterSet& theta, std::size_t J, std::size_t R,
                                std::uint64_t seed, Resampler resampler = Resampler::systematic,
                                std::size_t n_workers = 1) {
  if (R < 1 || J < 1) throw std::invalid_argument("replicated_eval: J and R must be >= 1");
  ReplicateMatrix m;
  m.n_units = data.n_units();
  m.n_reps = R;
  m.J = J;
  m.seed = seed;
  m.logliks.assign(m.n_units * R, 0.0);
  std::vector<std::vector<double>> unit_params(m.n_units);
  for (std::size_t u = 0; u < m.n_units; ++u)
    unit_params[u] = unit_parameters(theta, model.param_names(), u);
  // each (unit, replicate) cell is an independent task with its own stream;
  // warnings are merged in cell order afterwards so workers cannot reorder them
  std::vector<std::size_t> failed_cell(m.n_units * R, UnitFilterResult::npos);
  parallel_for(m.n_units * R, n_workers, [&](std::size_t c) {
    const std::size_t u = c / R, r = c % R;
    FilterOptions opts;
    opts.J = J;
    opts.seed = derive_key(seed, {stream_tag::eval_cell, u, r});
    opts.resampler = resampler;
    opts.failure = FailurePolicy::neginf;
    const FilterResult fr = particle_filter(model, data.unit(u), unit_params[u], opts);
    m.logliks[c] = fr.loglik;
    if (fr.failed()) failed_cell[c] = fr.failed_at;
  });
  for (std::size_t c = 0; c < failed_cell.size(); ++c)
    if (failed_cell[c] != UnitFilterResult::npos)
      m.warnings.push_back({c / R, c % R, failed_cell[c]});
  return m;
}

// ---- closed-form variance oracles -----------------------------------------
//
// For independent unit estimators with natural-scale means l_u and
// variances s2_u, replicated R times:
//   mean of products:  (1/R) [ prod(s2_u + l_u^2) - prod l_u^2 ]
//   product of means:  prod(s2_u / R + l_u^2) - prod l_u^2
// The second is smaller for R >= 2 because each cross term picks up a
// 1/R^k factor with k = number of variance factors, instead of a flat 1/R.

inline double variance_mean_of_products(const std::vector<double>& s2,
                                        const std::vector<double>& l, std::size_t R) {
  if (s2.size() != l.size()) throw std::invalid_argument("variance oracle: size mismatch");
  double prod_full = 1.0, prod_sq = 1.0;
  for (std::size_t u = 0; u < l.size(); ++u) {
    prod_full *= s2[u] + l[u] * l[u];
    prod_sq *= l[u] * l[u];
  }
  return (prod_full - prod_sq) / static_cast<double>(R);
}

inline double variance_product_of_means(const std::vector<double>& s2,
                                        const std::vector<double>& l, std::size_t R) {
  if (s2.size() != l.size()) throw std::invalid_argument("variance oracle: size mismatch");
  double prod_full = 1.0, prod_sq = 1.0;
  for (std::size_t u = 0; u < l.size(); ++u) {
    prod_full *= s2[u] / static_cast<double>(R) + l[u] * l[u];
    prod_sq *= l[u] * l[u];
  }
  return prod_full - prod_sq;
}

}  // namespace panelsmc

#endif  // PANELSMC_LIKELIHOOD_HPP
