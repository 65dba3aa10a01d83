#ifndef PANELSMC_COMMANDS_HPP
#define PANELSMC_COMMANDS_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/config.hpp"
#include "panelsmc/likelihood.hpp"
#include "panelsmc/mcap.hpp"
#include "panelsmc/models/registry.hpp"
#include "panelsmc/panel_data.hpp"
#include "panelsmc/parallel.hpp"
#include "panelsmc/pif.hpp"
#include "panelsmc/simulate.hpp"
#include "panelsmc/version.hpp"

namespace panelsmc {

/// A run that completed its control flow but produced no usable numbers
/// (all filters failed, no concave profile, ...); the CLI maps this to
/// exit code 3.  Output files written before the failure are kept.
struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

struct TaskStream {
  std::string task;
  std::uint64_t key;
};

class Stopwatch {
 public:
  Stopwatch() : wall_start_(std::chrono::steady_clock::now()), cpu_start_(std::clock()) {}
  double wall_seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_).count();
  }
  double cpu_seconds() const {
    return static_cast<double>(std::clock() - cpu_start_) / CLOCKS_PER_SEC;
  }

 private:
  std::chrono::steady_clock::time_point wall_start_;
  std::clock_t cpu_start_;
};

inline std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

/// Timing varies between reruns, so the manifest is the one output file
/// excluded from byte-identity comparisons; everything else is exact.
inline void write_manifest(const std::string& dir, const std::string& command,
                           const RunConfig& cfg, std::uint64_t seed, std::size_t workers,
                           const std::vector<TaskStream>& streams, const Stopwatch& watch) {
  std::ofstream os = open_output(dir, "manifest.json");
  os << "{\n";
  os << "  \"command\": \"" << command << "\",\n";
  os << "  \"model\": \"" << cfg.model_id << "\",\n";
  os << "  \"config_hash\": \"" << config_hash(cfg.raw_text) << "\",\n";
  os << "  \"seed\": " << seed << ",\n";
  os << "  \"workers\": " << workers << ",\n";
  os << "  \"version\": \"" << kVersion << "\",\n";
  os << "  \"wall_seconds\": " << csv::format_double(watch.wall_seconds()) << ",\n";
  os << "  \"cpu_seconds\": " << csv::format_double(watch.cpu_seconds()) << ",\n";
  os << "  \"streams\": [";
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (i) os << ",";
    os << "\n    {\"task\": \"" << streams[i].task << "\", \"key\": " << streams[i].key << "}";
  }
  os << (streams.empty() ? "]\n" : "\n  ]\n");
  os << "}\n";
}

/// Flat-coordinate label: the parameter name, qualified by unit for
/// unit-specific coordinates ("tau:unit3").
inline std::string coordinate_label(const ParameterSet& ps, std::size_t i) {
  const std::size_t u = ps.flat_unit(i);
  if (u == static_cast<std::size_t>(-1)) return ps.flat_name(i);
  return ps.flat_name(i) + ":" + ps.unit_labels()[u];
}

inline std::string sanitize_message(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline TransformSpec transform_from_row(const SearchRow& row) {
  if (row.transform == "log") return TransformSpec::log();
  if (row.transform == "logit") {
    if (!(row.lo < row.hi))
      throw ConfigError("[search] " + row.name + ": logit needs lo < hi");
    return TransformSpec::logit(row.lo, row.hi);
  }
  return TransformSpec::identity();
}

}  // namespace detail

// ---- config -> model objects ----------------------------------------------

/// Parameter set assembled from the [params] section for the given unit
/// labels: broadcast values, per-unit overrides, specific names from the
/// reserved `specific` key.
inline ParameterSet config_parameter_set(const RunConfig& cfg,
                                         const std::vector<std::string>& model_names,
                                         const std::vector<std::string>& labels) {
  for (const std::string& n : cfg.specific_names) {
    bool known = false;
    for (const std::string& m : model_names) known = known || m == n;
    if (!known) throw ConfigError("[params] specific lists unknown parameter '" + n + "'");
  }
  ParameterSet ps;
  ps.set_unit_labels(labels);
  for (const std::string& name : model_names) {
    bool specific = false;
    for (const std::string& n : cfg.specific_names) specific = specific || n == name;
    bool have_broadcast = false;
    double broadcast = 0.0;
    for (const auto& [n, v] : cfg.param_values)
      if (n == name) {
        broadcast = v;
        have_broadcast = true;
      }
    if (specific) {
      std::vector<double> values(labels.size());
      std::vector<bool> set(labels.size(), have_broadcast);
      for (double& v : values) v = broadcast;
      for (const auto& [key, v] : cfg.unit_values) {
        if (key.first != name) continue;
        bool matched = false;
        for (std::size_t u = 0; u < labels.size(); ++u)
          if (labels[u] == key.second) {
            values[u] = v;
            set[u] = true;
            matched = true;
          }
        if (!matched)
          throw ConfigError("[params] " + name + ":" + key.second + ": no such unit in the data");
      }
      for (std::size_t u = 0; u < labels.size(); ++u)
        if (!set[u])
          throw ConfigError("[params] " + name + ": no value for unit '" + labels[u] + "'");
      ps.add_specific(name, values);
    } else {
      for (const auto& [key, v] : cfg.unit_values)
        if (key.first == name)
          throw ConfigError("[params] " + name + ":" + key.second +
                            ": per-unit value for a parameter not listed as specific");
      if (!have_broadcast) throw ConfigError("[params]: missing model parameter '" + name + "'");
      ps.add_shared(name, broadcast);
    }
  }
  for (const SearchRow& row : cfg.search) {
    if (!ps.has(row.name))
      throw ConfigError("[search] " + row.name + ": not a model parameter");
    ps.set_transform(row.name, detail::transform_from_row(row));
  }
  return ps;
}

/// Loads the panel named by [data] and validates it against the model.
template <class Model>
PanelData load_panel(const Model& model, const RunConfig& cfg) {
  if (cfg.panel_path.empty()) throw ConfigError("[data] panel: required for this command");
  T0Policy policy;
  if (cfg.t0_fixed) {
    policy.kind = T0Policy::Kind::fixed;
    policy.fixed = cfg.t0;
  }
  PanelData pd;
  try {
    pd = read_panel_csv(cfg.panel_path, policy);
    if (!cfg.covariate_path.empty()) read_covariate_csv(cfg.covariate_path, pd);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const ValidationReport rep = validate_panel(pd, model);
  if (!rep.ok()) {
    std::ostringstream os;
    os << cfg.panel_path << ": " << rep;
    throw ConfigError(os.str());
  }
  return pd;
}

/// Base parameters for filtering or searching: the [data] params file when
/// given, otherwise the [params] section.  All model parameters must be
/// covered and the unit labels must match the panel.
template <class Model>
ParameterSet base_parameters(const Model& model, const RunConfig& cfg,
                             const std::vector<std::string>& labels) {
  if (!cfg.params_path.empty()) {
    ParameterSet ps;
    try {
      ps = read_parameter_file(cfg.params_path);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    for (const std::string& name : model.param_names())
      if (!ps.has(name))
        throw ConfigError(cfg.params_path + ": missing model parameter '" + name + "'");
    if (ps.n_specific() > 0 && ps.unit_labels() != labels)
      throw ConfigError(cfg.params_path + ": unit labels do not match the panel");
    if (ps.n_specific() == 0 && ps.n_units() == 0) {
      // shared-only files carry no labels; adopt the panel's
      ps.set_unit_labels(labels);
    }
    for (const SearchRow& row : cfg.search) {
      if (!ps.has(row.name))
        throw ConfigError("[search] " + row.name + ": not a model parameter");
      ps.set_transform(row.name, detail::transform_from_row(row));
    }
    return ps;
  }
  return config_parameter_set(cfg, model.param_names(), labels);
}

/// Search machinery shared by cmd_search and cmd_profile: sampling boxes
/// and perturbation scales from the [search] rows, with `exclude` (the
/// profiled parameter) pinned instead of searched.
struct SearchSetup {
  ParameterSet base;
  std::vector<SearchBox> boxes;
  std::vector<double> sigma0;           // flat, estimation scale
  std::vector<double> sigma0_specific;  // per specific parameter, marginal phase
};

inline SearchSetup build_search_setup(ParameterSet base, const RunConfig& cfg,
                                      const std::string& exclude = "") {
  SearchSetup s;
  s.base = std::move(base);
  s.sigma0.assign(s.base.flat_dim(), 0.0);
  s.sigma0_specific.assign(s.base.n_specific(), 0.0);
  for (const SearchRow& row : cfg.search) {
    if (row.name == exclude) continue;
    s.boxes.push_back({row.name, row.lo, row.hi});
    if (s.base.is_shared(row.name)) {
      std::size_t a = 0;
      while (s.base.shared_names()[a] != row.name) ++a;
      s.sigma0[s.base.flat_index_shared(a)] = row.sigma0;
    } else {
      std::size_t b = 0;
      while (s.base.specific_names()[b] != row.name) ++b;
      for (std::size_t u = 0; u < s.base.n_units(); ++u)
        s.sigma0[s.base.flat_index_specific(b, u)] = row.sigma0;
      s.sigma0_specific[b] = row.sigma_u0;
    }
  }
  return s;
}

inline MultiStartOptions search_options(const RunConfig& cfg, const SearchSetup& setup,
                                        std::uint64_t seed, std::size_t workers) {
  const AlgorithmConfig& a = cfg.alg;
  MultiStartOptions o;
  o.n_starts = a.nrep_if;
  o.joint.M = a.nmif;
  o.joint.J = a.np_if;
  o.joint.cooling = {a.cool_joint, a.horizon};
  o.joint.sigma0 = setup.sigma0;
  o.joint.initial_sigma_multiplier = a.init_sigma_mult;
  o.joint.resampler = a.resampler;
  o.do_marginal = a.marginal && setup.base.n_specific() > 0;
  o.marginal.M = a.nmif_u;
  o.marginal.J = a.np_if_u > 0 ? a.np_if_u : a.np_if;
  o.marginal.cooling = {a.cool_marginal, a.horizon};
  o.marginal.initial_sigma_multiplier = a.init_sigma_mult;
  o.marginal.resampler = a.resampler;
  o.sigma0_specific = setup.sigma0_specific;
  o.eval_J = a.np_pf;
  o.eval_R = o.do_marginal ? a.nrep_pf_u : a.nrep_pf;
  o.seed = seed;
  o.n_workers = workers;
  return o;
}

// ---- commands --------------------------------------------------------------

template <class Model>
int run_simulate(const Model& model, const RunConfig& cfg, std::uint64_t seed,
                 std::size_t workers, const std::string& out_dir) {
  (void)workers;  // simulation cost is negligible; units are sequential
  detail::Stopwatch watch;
  if (cfg.sim_units < 1 || cfg.sim_n_obs < 1)
    throw ConfigError("[simulate]: units and n_obs must be >= 1");
  std::vector<std::string> labels(cfg.sim_units);
  for (std::size_t u = 0; u < cfg.sim_units; ++u) labels[u] = "unit" + std::to_string(u + 1);

  const ParameterSet truth = base_parameters(model, cfg, labels);
  const double dt = cfg.sim_dt > 0.0 ? cfg.sim_dt : (cfg.model_id == "polio" ? 1.0 / 12.0 : 1.0);
  const std::vector<double> times = regular_times(cfg.sim_t0, dt, cfg.sim_n_obs);

  std::vector<CovariateTable> covs;
  if (!cfg.covariate_path.empty()) {
    PanelData skeleton;
    for (const std::string& l : labels) {
      UnitData ud;
      ud.label = l;
      skeleton.units.push_back(ud);
    }
    try {
      read_covariate_csv(cfg.covariate_path, skeleton);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    for (const auto& ud : skeleton.units) {
      if (ud.covariates.empty())
        throw ConfigError(cfg.covariate_path + ": no covariate rows for unit '" + ud.label + "'");
      covs.push_back(ud.covariates);
    }
  } else if (cfg.model_id == "polio") {
    throw ConfigError("[data] covariates: the polio model needs births and population");
  }

  const PanelData pd = simulate_panel(model, truth, times, cfg.sim_t0, covs, seed);

  {
    std::ofstream os = detail::open_output(out_dir, "panel.csv");
    write_panel_csv(pd, os);
  }
  {
    std::ofstream os = detail::open_output(out_dir, "params_used.csv");
    write_parameter_file(truth, os);
  }
  std::vector<detail::TaskStream> streams;
  for (std::size_t u = 0; u < cfg.sim_units; ++u)
    streams.push_back({"simulate:" + labels[u], derive_key(seed, {stream_tag::simulate, u})});
  detail::write_manifest(out_dir, "simulate", cfg, seed, workers, streams, watch);
  return 0;
}

template <class Model>
int run_filter(const Model& model, const RunConfig& cfg, std::uint64_t seed,
               std::size_t workers, const std::string& out_dir) {
  detail::Stopwatch watch;
  const PanelData pd = load_panel(model, cfg);
  const ParameterSet theta = base_parameters(model, cfg, pd.unit_labels());
  const AlgorithmConfig& a = cfg.alg;

  const ReplicateMatrix rm =
      replicated_eval(model, pd, theta, a.np_pf, a.nrep_pf, seed, a.resampler, workers);

  {
    std::ofstream os = detail::open_output(out_dir, "eval.csv");
    os << "unit,replicate,loglik\n";
    for (std::size_t u = 0; u < rm.n_units; ++u)
      for (std::size_t r = 0; r < rm.n_reps; ++r)
        os << pd.units[u].label << "," << r + 1 << "," << csv::format_double(rm.entry(u, r))
           << "\n";
  }

  const double pom = combine_product_of_means(rm);
  const double mop = combine_mean_of_products(rm);
  {
    std::ofstream os = detail::open_output(out_dir, "summary.csv");
    os << "combiner,loglik,se\n";
    os << "product_of_means," << csv::format_double(pom) << ","
       << csv::format_double(jackknife_se_product_of_means(rm)) << "\n";
    os << "mean_of_products," << csv::format_double(mop) << ","
       << csv::format_double(jackknife_se_mean_of_products(rm)) << "\n";
  }

  // per-time diagnostics from each unit's first replicate stream
  {
    std::vector<FilterResult> diag(pd.n_units());
    std::vector<std::vector<double>> params(pd.n_units());
    for (std::size_t u = 0; u < pd.n_units(); ++u)
      params[u] = unit_parameters(theta, model.param_names(), u);
    parallel_for(pd.n_units(), workers, [&](std::size_t u) {
      FilterOptions opts;
      opts.J = a.np_pf;
      opts.seed = derive_key(seed, {stream_tag::eval_cell, u, 0});
      opts.resampler = a.resampler;
      opts.failure = FailurePolicy::neginf;
      diag[u] = particle_filter(model, pd.unit(u), params[u], opts);
    });
    std::ofstream os = detail::open_output(out_dir, "diagnostics.csv");
    os << "unit,n,time,cond_loglik,ess\n";
    for (std::size_t u = 0; u < pd.n_units(); ++u)
      for (std::size_t n = 0; n < pd.units[u].n_obs(); ++n)
        os << pd.units[u].label << "," << n + 1 << ","
           << csv::format_double(pd.units[u].times[n]) << ","
           << csv::format_double(diag[u].cond_loglik[n]) << ","
           << csv::format_double(diag[u].ess[n]) << "\n";
  }

  std::vector<detail::TaskStream> streams;
  for (std::size_t u = 0; u < rm.n_units; ++u)
    for (std::size_t r = 0; r < rm.n_reps; ++r)
      streams.push_back({"eval:" + pd.units[u].label + ":" + std::to_string(r + 1),
                         derive_key(seed, {stream_tag::eval_cell, u, r})});
  detail::write_manifest(out_dir, "filter", cfg, seed, workers, streams, watch);

  if (!std::isfinite(pom))
    throw NumericalFailure("filter: combined log-likelihood is not finite");
  return 0;
}

namespace detail {

inline void write_search_outputs(const std::vector<StartResult>& results,
                                 const ParameterSet& base, const std::string& out_dir) {
  {
    std::ofstream os = open_output(out_dir, "estimates.csv");
    os << "rank,replicate,loglik,se,failed,error";
    for (std::size_t i = 0; i < base.flat_dim(); ++i) os << "," << coordinate_label(base, i);
    os << "\n";
    for (std::size_t k = 0; k < results.size(); ++k) {
      const StartResult& sr = results[k];
      const ParameterSet& ps = sr.failed ? sr.start : sr.refined;
      os << k + 1 << "," << sr.replicate + 1 << "," << csv::format_double(sr.loglik) << ","
         << csv::format_double(sr.se) << "," << (sr.failed ? 1 : 0) << ","
         << sanitize_message(sr.error);
      for (std::size_t a = 0; a < base.n_shared(); ++a)
        os << "," << csv::format_double(ps.shared_value(base.shared_names()[a]));
      for (std::size_t u = 0; u < base.n_units(); ++u)
        for (std::size_t b = 0; b < base.n_specific(); ++b)
          os << "," << csv::format_double(ps.specific_value(base.specific_names()[b], u));
      os << "\n";
    }
  }
  for (const StartResult& sr : results) {
    if (sr.joint.mean_trace.empty()) continue;
    std::ofstream os =
        open_output(out_dir, "trace_rep" + std::to_string(sr.replicate + 1) + ".csv");
    os << "m,parameter,swarm_mean,sigma_m,perturbed_loglik\n";
    for (std::size_t m = 0; m < sr.joint.mean_trace.size(); ++m)
      for (std::size_t i = 0; i < base.flat_dim(); ++i)
        os << m + 1 << "," << coordinate_label(base, i) << ","
           << csv::format_double(sr.joint.mean_trace[m][i]) << ","
           << csv::format_double(sr.joint.sigma_trace[m]) << ","
           << csv::format_double(sr.joint.loglik_trace[m]) << "\n";
  }
  if (!results.empty() && !results.front().failed) {
    std::ofstream os = open_output(out_dir, "best_params.csv");
    write_parameter_file(results.front().refined, os);
  }
}

}  // namespace detail

template <class Model>
int run_search(const Model& model, const RunConfig& cfg, std::uint64_t seed,
               std::size_t workers, const std::string& out_dir) {
  detail::Stopwatch watch;
  const PanelData pd = load_panel(model, cfg);
  SearchSetup setup = build_search_setup(base_parameters(model, cfg, pd.unit_labels()), cfg);
  const MultiStartOptions opts = search_options(cfg, setup, seed, workers);

  const std::vector<StartResult> results = multi_start(model, pd, setup.base, setup.boxes, opts);
  detail::write_search_outputs(results, setup.base, out_dir);

  std::vector<detail::TaskStream> streams;
  for (std::size_t r = 0; r < opts.n_starts; ++r) {
    streams.push_back({"start_draw:" + std::to_string(r + 1),
                       derive_key(seed, {stream_tag::start_draw, r})});
    streams.push_back(
        {"joint:" + std::to_string(r + 1), derive_key(seed, {stream_tag::search_pif, r})});
    if (opts.do_marginal)
      streams.push_back({"marginal:" + std::to_string(r + 1),
                         derive_key(seed, {stream_tag::search_marginal, r})});
    streams.push_back(
        {"eval:" + std::to_string(r + 1), derive_key(seed, {stream_tag::search_eval, r})});
  }
  detail::write_manifest(out_dir, "search", cfg, seed, workers, streams, watch);

  if (results.empty() || results.front().failed || !std::isfinite(results.front().loglik))
    throw NumericalFailure("search: no starting point produced a finite likelihood");
  return 0;
}

template <class Model>
int run_profile(const Model& model, const RunConfig& cfg, std::uint64_t seed,
                std::size_t workers, const std::string& out_dir) {
  detail::Stopwatch watch;
  if (cfg.profile_parameter.empty())
    throw ConfigError("[profile] parameter: required for the profile command");
  if (!(cfg.profile_lo < cfg.profile_hi))
    throw ConfigError("[profile]: lo must be strictly below hi");

  const PanelData pd = load_panel(model, cfg);
  ParameterSet base = base_parameters(model, cfg, pd.unit_labels());
  if (!base.is_shared(cfg.profile_parameter))
    throw ConfigError("[profile] parameter: '" + cfg.profile_parameter +
                      "' is not a shared parameter");
  // the profiled coordinate is pinned per point, so give it the exact
  // identity mapping regardless of any search-row transform
  base.set_transform(cfg.profile_parameter, TransformSpec::identity());

  SearchSetup setup = build_search_setup(std::move(base), cfg, cfg.profile_parameter);
  std::vector<double> grid;
  try {
    grid = profile_design(cfg.profile_lo, cfg.profile_hi, cfg.profile_points);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  const std::size_t starts =
      cfg.profile_starts > 0 ? cfg.profile_starts : cfg.alg.nrep_if;

  std::vector<std::vector<StartResult>> per_point(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t k) {
    ParameterSet pinned = setup.base;
    pinned.shared_value(cfg.profile_parameter) = grid[k];
    SearchSetup local{pinned, setup.boxes, setup.sigma0, setup.sigma0_specific};
    MultiStartOptions o = search_options(cfg, local, derive_key(seed, {stream_tag::profile, k}), 1);
    o.n_starts = starts;
    per_point[k] = multi_start(model, pd, local.base, local.boxes, o);
  });

  std::vector<ProfilePoint> points;
  {
    std::ofstream os = detail::open_output(out_dir, "points.csv");
    os << "phi,loglik\n";
    for (std::size_t k = 0; k < grid.size(); ++k)
      for (const StartResult& sr : per_point[k]) {
        points.push_back({grid[k], sr.loglik});
        os << csv::format_double(grid[k]) << "," << csv::format_double(sr.loglik) << "\n";
      }
  }

  std::vector<detail::TaskStream> streams;
  for (std::size_t k = 0; k < grid.size(); ++k)
    streams.push_back({"profile_point:" + std::to_string(k + 1),
                       derive_key(seed, {stream_tag::profile, k})});
  detail::write_manifest(out_dir, "profile", cfg, seed, workers, streams, watch);

  // points.csv and the manifest survive an mcap failure for post-mortems
  McapOptions mo;
  mo.lambda = cfg.alg.lambda;
  mo.confidence = cfg.confidence;
  McapResult mc;
  try {
    mc = mcap(points, mo);
  } catch (const std::exception& e) {
    throw NumericalFailure(std::string("profile: ") + e.what());
  }

  {
    std::ofstream os = detail::open_output(out_dir, "curve.csv");
    os << "phi,smoothed_loglik\n";
    for (std::size_t g = 0; g < mc.grid.size(); ++g)
      os << csv::format_double(mc.grid[g]) << "," << csv::format_double(mc.smoothed[g]) << "\n";
  }
  {
    std::ofstream os = detail::open_output(out_dir, "profile_summary.csv");
    os << "parameter,phi_hat,se_stat,se_mc,se_total,delta,lo,hi,truncated_lo,truncated_hi,"
          "multiple_intervals,dropped_points,lambda,confidence\n";
    os << cfg.profile_parameter << "," << csv::format_double(mc.phi_hat) << ","
       << csv::format_double(mc.se_stat) << "," << csv::format_double(mc.se_mc) << ","
       << csv::format_double(mc.se_total) << "," << csv::format_double(mc.delta) << ","
       << csv::format_double(mc.lo) << "," << csv::format_double(mc.hi) << ","
       << (mc.truncated_lo ? 1 : 0) << "," << (mc.truncated_hi ? 1 : 0) << ","
       << (mc.multiple_intervals ? 1 : 0) << "," << mc.dropped_points << ","
       << csv::format_double(mc.lambda) << "," << csv::format_double(mc.confidence) << "\n";
  }
  return 0;
}

// ---- dispatch --------------------------------------------------------------

inline int run_command(const std::string& command, const RunConfig& cfg, std::uint64_t seed,
                       std::size_t workers, const std::string& out_dir) {
  return with_model(cfg.model_id, [&](const auto& model) {
    if (command == "simulate") return run_simulate(model, cfg, seed, workers, out_dir);
    if (command == "filter") return run_filter(model, cfg, seed, workers, out_dir);
    if (command == "search") return run_search(model, cfg, seed, workers, out_dir);
    if (command == "profile") return run_profile(model, cfg, seed, workers, out_dir);
    throw std::logic_error("unknown command '" + command + "'");
  });
}

}  // namespace panelsmc

#endif  // PANELSMC_COMMANDS_HPP
