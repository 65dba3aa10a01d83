#ifndef PANELSMC_SIMULATE_HPP
#define PANELSMC_SIMULATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "panelsmc/model.hpp"
#include "panelsmc/panel_data.hpp"
#include "panelsmc/params.hpp"
#include "panelsmc/rng.hpp"

namespace panelsmc {

/// Draws a full synthetic panel: for each unit, rinit at t0 then
/// alternating rprocess / rmeasure along the observation grid.  Unit count
/// and labels come from the parameter set; each unit consumes its own rng
/// stream, so the output is independent of unit evaluation order.
///
/// `covariates`, when nonempty, supplies one table per unit (shared table:
/// pass U copies or attach afterwards).
template <class Model>
PanelData simulate_panel(const Model& model, const ParameterSet& ps,
                         const std::vector<double>& times, double t0,
                         const std::vector<CovariateTable>& covariates, std::uint64_t seed) {
  static_assert(UnitModelC<Model>);
  if (times.empty()) throw std::invalid_argument("simulate_panel: need at least one time");
  if (!(t0 <= times.front()))
    throw std::invalid_argument("simulate_panel: t0 must not exceed the first time");
  if (!covariates.empty() && covariates.size() != ps.n_units())
    throw std::invalid_argument("simulate_panel: one covariate table per unit required");

  const std::size_t S = model.state_dim();
  const std::size_t Y = model.obs_dim();
  PanelData pd;
  pd.obs_names.assign(1, Model::obs_column());

  for (std::size_t u = 0; u < ps.n_units(); ++u) {
    UnitData ud;
    ud.label = ps.unit_labels()[u];
    ud.t0 = t0;
    ud.times = times;
    if (!covariates.empty()) ud.covariates = covariates[u];

    const std::vector<double> p = unit_parameters(ps, model.param_names(), u);
    RngStream rng(derive_key(seed, {stream_tag::simulate, u}));
    std::vector<double> x(S), y(Y);
    model.rinit(p.data(), ud.covariates, t0, rng, x.data());
    double t_prev = t0;
    for (std::size_t n = 0; n < times.size(); ++n) {
      model.rprocess(x.data(), t_prev, times[n], p.data(), ud.covariates, rng);
      model.rmeasure(x.data(), times[n], n, p.data(), ud.covariates, rng, y.data());
      ud.obs.push_back(y);
      t_prev = times[n];
    }
    pd.units.push_back(std::move(ud));
  }
  return pd;
}

/// Evenly spaced observation grid t0 + dt, ..., t0 + N dt.
inline std::vector<double> regular_times(double t0, double dt, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = t0 + dt * static_cast<double>(i + 1);
  return out;
}

}  // namespace panelsmc

#endif  // PANELSMC_SIMULATE_HPP
