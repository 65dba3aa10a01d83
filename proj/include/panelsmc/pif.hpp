#ifndef PANELSMC_PIF_HPP
#define PANELSMC_PIF_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "panelsmc/likelihood.hpp"
#include "panelsmc/model.hpp"
#include "panelsmc/panel_data.hpp"
#include "panelsmc/parallel.hpp"
#include "panelsmc/params.hpp"
#include "panelsmc/smc.hpp"

namespace panelsmc {

/// Geometric cooling: iteration m (1-based) perturbs with scale
/// sigma0 * factor^(m / horizon).
struct CoolingSchedule {
  double factor = 0.5;
  double horizon = 50.0;
  double multiplier(std::size_t m_one_based) const {
    return std::pow(factor, static_cast<double>(m_one_based) / horizon);
  }
};

struct PifOptions {
  std::size_t M = 50;  // iterations over the whole panel
  std::size_t J = 1000;
  CoolingSchedule cooling;
  std::vector<double> sigma0;  // per flat coordinate, estimation scale; 0 = fixed
  double initial_sigma_multiplier = 1.0;  // scales the pre-rinit perturbation only
  Resampler resampler = Resampler::systematic;
  std::uint64_t seed = 0;
  bool record_traces = true;
};

struct PifWarning {
  std::size_t m;  // 1-based iteration
  std::size_t u;
  std::size_t n;  // time index where all weights vanished
};

struct PifResult {
  ParameterSet estimate;  // natural-scale swarm mean after the last iteration
  std::vector<double> final_swarm;  // J x D estimation-scale rows
  std::size_t J = 0;
  std::size_t D = 0;
  std::vector<std::vector<double>> mean_trace;  // per iteration: natural-scale swarm mean
  std::vector<double> loglik_trace;             // per iteration: perturbed panel loglik
  std::vector<double> sigma_trace;              // per iteration: cooling multiplier
  std::vector<PifWarning> warnings;
  std::size_t peak_live_particles = 0;
};

namespace detail {

/// Parameter side of the iterated filter: a swarm of estimation-scale
/// rows that is perturbed before each propagation and resampled with the
/// states.  While unit u is filtered only the shared coordinates and unit
/// u's own coordinates receive noise; other units' coordinates ride along
/// unperturbed but are still resampled.  Coordinates with zero scale draw
/// nothing, so a run with all scales zero consumes rng streams exactly
/// like the plain filter.
struct ParamSwarm {
  std::size_t J = 0, D = 0, P = 0;
  std::vector<double> th;       // J x D, estimation scale
  std::vector<double> scratch;  // J x D
  std::vector<double> nat;      // J x P, natural scale for the active unit
  std::vector<double> nat_scratch;
  UnitParamView view;
  std::vector<std::size_t> active;  // flat coordinates perturbed for the active unit
  std::vector<double> sd_step;      // per active coordinate
  std::vector<double> sd_init;
  RngStream* perturb = nullptr;

  static constexpr bool owns_particle_slots = true;

  void init(std::size_t j, std::size_t d, std::size_t p) {
    J = j;
    D = d;
    P = p;
    th.assign(J * D, 0.0);
    scratch.assign(J * D, 0.0);
    nat.assign(J * P, 0.0);
    nat_scratch.assign(J * P, 0.0);
  }

  /// Selects unit u: gathers its model-order view and the coordinates to
  /// perturb at scale sigma_mult * sigma0.
  void activate_unit(const ParameterSet& structure, const std::vector<std::string>& model_names,
                     std::size_t u, const std::vector<double>& sigma0, double sigma_mult,
                     double init_mult) {
    view = UnitParamView(structure, model_names, u);
    active.clear();
    sd_step.clear();
    sd_init.clear();
    for (std::size_t i = 0; i < D; ++i) {
      if (!(sigma0[i] > 0.0)) continue;
      const std::size_t owner = structure.flat_unit(i);
      if (owner != static_cast<std::size_t>(-1) && owner != u) continue;
      active.push_back(i);
      sd_step.push_back(sigma_mult * sigma0[i]);
      sd_init.push_back(sigma_mult * sigma0[i] * init_mult);
    }
  }

  void begin_unit() {
    add_noise(sd_init);
    refresh();
  }
  void step(std::size_t) {
    add_noise(sd_step);
    refresh();
  }
  const double* params(std::size_t j) const { return &nat[j * P]; }

  void reorder(const std::vector<std::uint32_t>& anc) {
    for (std::size_t j = 0; j < J; ++j) {
      const double* ts = &th[anc[j] * D];
      std::copy(ts, ts + D, &scratch[j * D]);
      const double* ns = &nat[anc[j] * P];
      std::copy(ns, ns + P, &nat_scratch[j * P]);
    }
    th.swap(scratch);
    nat.swap(nat_scratch);
  }

  void add_noise(const std::vector<double>& sd) {
    for (std::size_t j = 0; j < J; ++j) {
      double* row = &th[j * D];
      for (std::size_t k = 0; k < active.size(); ++k) row[active[k]] += perturb->normal(0.0, sd[k]);
    }
  }
  void refresh() {
    for (std::size_t j = 0; j < J; ++j) view.gather(&th[j * D], &nat[j * P]);
  }
};

inline std::vector<double> swarm_mean(const std::vector<double>& th, std::size_t J,
                                      std::size_t D) {
  std::vector<double> mean(D, 0.0);
  for (std::size_t j = 0; j < J; ++j)
    for (std::size_t i = 0; i < D; ++i) mean[i] += th[j * D + i];
  for (double& v : mean) v /= static_cast<double>(J);
  return mean;
}

inline std::vector<double> to_natural_coords(const ParameterSet& structure,
                                             const std::vector<double>& est) {
  std::vector<double> nat(est.size());
  for (std::size_t i = 0; i < est.size(); ++i)
    nat[i] = structure.flat_transform(i).to_natural(est[i]);
  return nat;
}

}  // namespace detail

/// Iterated filtering over the panel from an explicit estimation-scale
/// swarm (J rows of structure.flat_dim() coordinates).  Each iteration
/// sweeps the units in order; the swarm leaving unit u seeds unit u+1,
/// and the swarm leaving the last unit starts the next iteration.  The
/// point estimate is the swarm mean on the estimation scale, mapped back
/// to natural scale.
template <class Model>
PifResult pif_run(const Model& model, const PanelData& data, const ParameterSet& structure,
                  std::vector<double> swarm0, const PifOptions& opts,
                  StorageMeter* meter = nullptr) {
  static_assert(UnitModelC<Model>);
  const std::size_t D = structure.flat_dim();
  const std::size_t U = data.n_units();
  const std::size_t J = opts.J;
  if (J < 2) throw std::invalid_argument("pif_run: J must be >= 2");
  if (U == 0) throw std::invalid_argument("pif_run: no units");
  if (structure.n_units() != U) throw std::invalid_argument("pif_run: unit count mismatch");
  if (swarm0.size() != J * D) throw std::invalid_argument("pif_run: swarm size mismatch");
  if (opts.sigma0.size() != D)
    throw std::invalid_argument("pif_run: sigma0 must have one entry per flat coordinate");

  StorageMeter local;
  StorageMeter& sm = meter ? *meter : local;

  detail::ParamSwarm swarm;
  swarm.init(J, D, model.param_names().size());
  swarm.th = std::move(swarm0);
  sm.acquire(2 * J);  // the swarm's two generations carry both parameter and state rows

  PifResult res;
  res.estimate = structure;
  res.J = J;
  res.D = D;

  for (std::size_t m = 1; m <= opts.M; ++m) {
    const double mult = opts.cooling.multiplier(m);
    double panel_loglik = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      RngStream perturb_rng(derive_key(opts.seed, {stream_tag::pif_perturb, m - 1, u}));
      RngStream filter_rng(derive_key(opts.seed, {stream_tag::pif_filter, m - 1, u}));
      swarm.perturb = &perturb_rng;
      swarm.activate_unit(structure, model.param_names(), u, opts.sigma0, mult,
                          opts.initial_sigma_multiplier);
      const UnitFilterResult fr =
          detail::filter_unit(model, data.unit(u), J, opts.resampler, FailurePolicy::uniform,
                              false, swarm, filter_rng, &sm);
      panel_loglik += fr.loglik;
      for (std::size_t n : fr.failure_times) res.warnings.push_back({m, u, n});
    }
    if (opts.record_traces) {
      const std::vector<double> mean = detail::swarm_mean(swarm.th, J, D);
      res.mean_trace.push_back(detail::to_natural_coords(structure, mean));
      res.loglik_trace.push_back(panel_loglik);
      res.sigma_trace.push_back(mult);
    }
  }

  const std::vector<double> mean = detail::swarm_mean(swarm.th, J, D);
  res.estimate.unflatten(mean);
  res.final_swarm = std::move(swarm.th);
  sm.release(2 * J);
  res.peak_live_particles = sm.peak;
  return res;
}

/// Same, starting every swarm member at `start`.
template <class Model>
PifResult pif_run(const Model& model, const PanelData& data, const ParameterSet& start,
                  const PifOptions& opts, StorageMeter* meter = nullptr) {
  const std::vector<double> flat = start.flatten();
  std::vector<double> swarm0(opts.J * flat.size());
  for (std::size_t j = 0; j < opts.J; ++j)
    std::copy(flat.begin(), flat.end(), swarm0.begin() + j * flat.size());
  return pif_run(model, data, start, std::move(swarm0), opts, meter);
}

// ---- marginal refinement ---------------------------------------------------

struct MarginalOptions {
  std::size_t M = 50;
  std::size_t J = 1000;
  CoolingSchedule cooling{0.25, 50.0};  // faster cooling than the joint phase
  double initial_sigma_multiplier = 1.0;
  Resampler resampler = Resampler::systematic;
  std::uint64_t seed = 0;
};

/// Re-estimates each unit's specific parameters one unit at a time,
/// holding the shared parameters fixed at their values in `start`.  The
/// panel factorizes over units once the shared parameters are pinned, so
/// each unit's refinement is an independent single-unit run.
/// `sigma0_specific` has one estimation-scale entry per specific
/// parameter, applied to every unit.
template <class Model>
ParameterSet marginal_refine(const Model& model, const PanelData& data,
                             const ParameterSet& start,
                             const std::vector<double>& sigma0_specific,
                             const MarginalOptions& opts, std::size_t n_workers = 1) {
  const std::size_t B = start.n_specific();
  if (sigma0_specific.size() != B)
    throw std::invalid_argument("marginal_refine: need one scale per specific parameter");
  if (start.n_units() != data.n_units())
    throw std::invalid_argument("marginal_refine: unit count mismatch");
  ParameterSet out = start;
  if (B == 0 || opts.M == 0) return out;

  const std::size_t U = data.n_units();
  std::vector<ParameterSet> refined(U, ParameterSet{});
  parallel_for(U, n_workers, [&](std::size_t u) {
    PanelData sub;
    sub.obs_names = data.obs_names;
    sub.units.push_back(data.unit(u));

    ParameterSet single;
    single.set_unit_labels({start.unit_labels()[u]});
    for (const std::string& name : start.shared_names())
      single.add_shared(name, start.shared_value(name), start.transform(name));
    for (const std::string& name : start.specific_names())
      single.add_specific(name, {start.specific_value(name, u)}, start.transform(name));

    PifOptions po;
    po.M = opts.M;
    po.J = opts.J;
    po.cooling = opts.cooling;
    po.initial_sigma_multiplier = opts.initial_sigma_multiplier;
    po.resampler = opts.resampler;
    po.seed = derive_key(opts.seed, {stream_tag::marginal, u});
    po.record_traces = false;
    po.sigma0.assign(single.flat_dim(), 0.0);  // shared coordinates stay fixed
    for (std::size_t b = 0; b < B; ++b)
      po.sigma0[single.flat_index_specific(b, 0)] = sigma0_specific[b];

    refined[u] = pif_run(model, sub, single, po).estimate;
  });

  for (std::size_t u = 0; u < U; ++u)
    for (const std::string& name : start.specific_names())
      out.specific_value(name, u) = refined[u].specific_value(name, 0);
  return out;
}

// ---- multi-start search ----------------------------------------------------

/// Natural-scale sampling box for one searched parameter.  Parameters
/// without a box stay fixed at their value in the base set.
struct SearchBox {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

struct StartResult {
  std::size_t replicate = 0;
  ParameterSet start;
  PifResult joint;
  ParameterSet refined;  // equals joint.estimate when no marginal phase runs
  ReplicateMatrix eval;
  double loglik = kNegInf;  // product-of-means combination of `eval`
  double se = 0.0;
  bool failed = false;
  std::string error;
};

struct MultiStartOptions {
  std::size_t n_starts = 1;
  PifOptions joint;  // seed ignored; per-replicate keys are derived from `seed` below
  bool do_marginal = false;
  MarginalOptions marginal;  // seed ignored likewise
  std::vector<double> sigma0_specific;
  std::size_t eval_J = 1000;
  std::size_t eval_R = 1;
  std::uint64_t seed = 0;
  std::size_t n_workers = 1;
};

/// Draws a starting point per replicate uniformly over the boxes (one
/// independent draw per unit for specific parameters), runs the joint
/// iterated filter, optionally the marginal refinement, then evaluates
/// the endpoint with replicated filters.  Results come back sorted by
/// combined log-likelihood, best first; a replicate that throws is kept
/// with loglik -inf rather than aborting the others.
template <class Model>
std::vector<StartResult> multi_start(const Model& model, const PanelData& data,
                                     const ParameterSet& base,
                                     const std::vector<SearchBox>& boxes,
                                     const MultiStartOptions& opts) {
  for (const SearchBox& b : boxes) {
    if (!base.has(b.name)) throw std::invalid_argument("search box for unknown parameter '" + b.name + "'");
    if (!(b.lo <= b.hi)) throw std::invalid_argument("search box for '" + b.name + "' has lo > hi");
  }
  std::vector<StartResult> out(opts.n_starts);
  parallel_for(opts.n_starts, opts.n_workers, [&](std::size_t r) {
    StartResult& sr = out[r];
    sr.replicate = r;
    sr.start = base;
    RngStream draw(derive_key(opts.seed, {stream_tag::start_draw, r}));
    for (const SearchBox& b : boxes) {
      if (sr.start.is_shared(b.name)) {
        sr.start.shared_value(b.name) = draw.uniform(b.lo, b.hi);
      } else {
        for (std::size_t u = 0; u < sr.start.n_units(); ++u)
          sr.start.specific_value(b.name, u) = draw.uniform(b.lo, b.hi);
      }
    }
    try {
      PifOptions jo = opts.joint;
      jo.seed = derive_key(opts.seed, {stream_tag::search_pif, r});
      sr.joint = pif_run(model, data, sr.start, jo);
      sr.refined = sr.joint.estimate;
      if (opts.do_marginal) {
        MarginalOptions mo = opts.marginal;
        mo.seed = derive_key(opts.seed, {stream_tag::search_marginal, r});
        sr.refined = marginal_refine(model, data, sr.refined, opts.sigma0_specific, mo);
      }
      sr.eval = replicated_eval(model, data, sr.refined, opts.eval_J, opts.eval_R,
                                derive_key(opts.seed, {stream_tag::search_eval, r}),
                                opts.joint.resampler);
      sr.loglik = combine_product_of_means(sr.eval);
      sr.se = jackknife_se_product_of_means(sr.eval);
    } catch (const std::exception& e) {
      sr.failed = true;
      sr.error = e.what();
      sr.loglik = kNegInf;
    }
  });
  std::stable_sort(out.begin(), out.end(), [](const StartResult& a, const StartResult& b) {
    return a.loglik > b.loglik;
  });
  return out;
}

}  // namespace panelsmc

#endif  // PANELSMC_PIF_HPP
