#ifndef PANELSMC_CONFIG_HPP
#define PANELSMC_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "panelsmc/csv.hpp"
#include "panelsmc/smc.hpp"

namespace panelsmc {

/// Bad or missing configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Particle counts, replicate counts, and cooling settings, defaulted per
/// model and overridable from the [algorithm] section.
struct AlgorithmConfig {
  std::size_t np_pf = 1000;    // evaluation particles
  std::size_t nrep_pf = 1;     // evaluation replicates
  std::size_t np_if = 1000;    // joint-search particles
  std::size_t nrep_if = 1;     // search starting points
  std::size_t nmif = 50;       // joint-search iterations
  std::size_t np_if_u = 0;     // marginal-refinement particles
  std::size_t nrep_pf_u = 0;   // endpoint evaluation replicates when refining
  std::size_t nmif_u = 0;      // marginal-refinement iterations
  double lambda = 0.9;         // profile smoothing fraction
  double cool_joint = 0.5;
  double cool_marginal = 0.25;
  double horizon = 50.0;
  double init_sigma_mult = 1.0;
  bool marginal = false;       // run the per-unit refinement phase
  Resampler resampler = Resampler::systematic;
};

inline AlgorithmConfig default_algorithm(const std::string& model_id) {
  AlgorithmConfig a;
  if (model_id == "gompertz") {
    a.np_pf = 4000;
    a.nrep_pf = 10;
    a.np_if = 2000;
    a.nrep_if = 13;
    a.nmif = 100;
    a.np_if_u = 1000;
    a.nrep_pf_u = 4;
    a.nmif_u = 50;
    a.lambda = 0.9;
    a.marginal = true;
  } else if (model_id == "polio") {
    a.np_pf = 5000;
    a.nrep_pf = 10;
    a.np_if = 4000;
    a.nrep_if = 19;
    a.nmif = 236;
    a.np_if_u = 6000;
    a.nrep_pf_u = 2;
    a.nmif_u = 118;
    a.lambda = 0.6;
    a.marginal = true;
  } else if (model_id == "contacts") {
    a.np_pf = 4000;
    a.nrep_pf = 10;
    a.np_if = 4000;
    a.nrep_if = 13;
    a.nmif = 200;
    a.lambda = 0.9;
    a.marginal = false;  // every parameter is shared
  } else {
    throw ConfigError("unknown model id '" + model_id + "'");
  }
  return a;
}

/// One [search] line: a natural-scale sampling box, the estimation
/// transform, and perturbation scales for the joint and marginal phases.
struct SearchRow {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
  std::string transform = "identity";  // identity | log | logit (bounds = the box)
  double sigma0 = 0.0;
  double sigma_u0 = 0.0;
};

struct RunConfig {
  std::string model_id;
  std::uint64_t seed = 0;
  bool seed_set = false;  // CLI --seed overrides; config [run] seed is the fallback
  std::size_t workers = 1;
  bool workers_set = false;

  // [data]
  std::string panel_path;
  std::string covariate_path;
  std::string params_path;  // optional parameter file; overrides [params] values
  bool t0_fixed = false;
  double t0 = 0.0;

  // [simulate]
  std::size_t sim_units = 0;
  std::size_t sim_n_obs = 0;
  double sim_t0 = 0.0;
  double sim_dt = 0.0;  // 0 = per-model default (1, or 1/12 for polio)

  // [params]
  std::vector<std::string> specific_names;
  std::vector<std::pair<std::string, double>> param_values;  // broadcast values
  std::vector<std::pair<std::pair<std::string, std::string>, double>> unit_values;

  // [search]
  std::vector<SearchRow> search;

  AlgorithmConfig alg;

  // [profile]
  std::string profile_parameter;
  double profile_lo = 0.0;
  double profile_hi = 0.0;
  std::size_t profile_points = 10;
  std::size_t profile_starts = 0;  // 0 = nrep_if
  double confidence = 0.95;

  std::string raw_text;  // exact file bytes, for hashing into the manifest
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline double config_number(const std::string& v, const std::string& where) {
  try {
    return csv::parse_double(v, where);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
}

inline std::size_t config_count(const std::string& v, const std::string& where) {
  const double d = config_number(v, where);
  if (!(d >= 0.0) || d != static_cast<double>(static_cast<std::size_t>(d)))
    throw ConfigError(where + ": expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(d);
}

}  // namespace detail

/// Parses the flat sectioned key-value format:
///   [section]
///   key = value        # comment
/// Unknown sections or keys are errors, so typos fail loudly.
inline RunConfig parse_config(std::istream& is, const std::string& origin) {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;
  std::string line, raw;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    raw += line;
    raw += '\n';
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      sections.push_back({detail::trim(line.substr(1, line.size() - 2)), {}});
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (sections.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    sections.back().second.push_back(
        {detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1))});
  }

  RunConfig cfg;
  cfg.raw_text = raw;
  bool have_run = false;
  // [run] first, so model defaults are in place before [algorithm] overrides
  for (const auto& [sec, entries] : sections) {
    if (sec != "run") continue;
    have_run = true;
    for (const auto& [key, val] : entries) {
      const std::string where = origin + ": [run] " + key;
      if (key == "model") {
        cfg.model_id = val;
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::config_count(val, where));
        cfg.seed_set = true;
      } else if (key == "workers") {
        cfg.workers = detail::config_count(val, where);
        cfg.workers_set = true;
        if (cfg.workers < 1) throw ConfigError(where + ": must be >= 1");
      } else {
        throw ConfigError(where + ": unknown key");
      }
    }
  }
  if (!have_run || cfg.model_id.empty())
    throw ConfigError(origin + ": [run] section with a 'model' key is required");
  cfg.alg = default_algorithm(cfg.model_id);

  for (const auto& [sec, entries] : sections) {
    if (sec == "run") continue;
    if (sec == "data") {
      for (const auto& [key, val] : entries) {
        const std::string where = origin + ": [data] " + key;
        if (key == "panel")
          cfg.panel_path = val;
        else if (key == "covariates")
          cfg.covariate_path = val;
        else if (key == "params")
          cfg.params_path = val;
        else if (key == "t0") {
          cfg.t0 = detail::config_number(val, where);
          cfg.t0_fixed = true;
        } else
          throw ConfigError(where + ": unknown key");
      }
    } else if (sec == "simulate") {
      for (const auto& [key, val] : entries) {
        const std::string where = origin + ": [simulate] " + key;
        if (key == "units")
          cfg.sim_units = detail::config_count(val, where);
        else if (key == "n_obs")
          cfg.sim_n_obs = detail::config_count(val, where);
        else if (key == "t0")
          cfg.sim_t0 = detail::config_number(val, where);
        else if (key == "dt")
          cfg.sim_dt = detail::config_number(val, where);
        else
          throw ConfigError(where + ": unknown key");
      }
    } else if (sec == "params") {
      for (const auto& [key, val] : entries) {
        const std::string where = origin + ": [params] " + key;
        if (key == "specific") {
          for (const std::string& n : csv::split_line(val))
            if (!n.empty()) cfg.specific_names.push_back(n);
        } else {
          const std::size_t colon = key.find(':');
          if (colon == std::string::npos)
            cfg.param_values.push_back({key, detail::config_number(val, where)});
          else
            cfg.unit_values.push_back(
                {{key.substr(0, colon), key.substr(colon + 1)}, detail::config_number(val, where)});
        }
      }
    } else if (sec == "search") {
      for (const auto& [key, val] : entries) {
        const std::string where = origin + ": [search] " + key;
        const std::vector<std::string> f = detail::split_ws(val);
        if (f.size() != 4 && f.size() != 5)
          throw ConfigError(where + ": expected 'lo hi transform sigma0 [sigma_u0]'");
        SearchRow row;
        row.name = key;
        row.lo = detail::config_number(f[0], where);
        row.hi = detail::config_number(f[1], where);
        row.transform = f[2];
        if (row.transform != "identity" && row.transform != "log" && row.transform != "logit")
          throw ConfigError(where + ": transform must be identity, log, or logit");
        row.sigma0 = detail::config_number(f[3], where);
        row.sigma_u0 = f.size() == 5 ? detail::config_number(f[4], where) : row.sigma0;
        if (!(row.lo <= row.hi)) throw ConfigError(where + ": lo must not exceed hi");
        if (row.sigma0 < 0.0 || row.sigma_u0 < 0.0)
          throw ConfigError(where + ": perturbation scales must be >= 0");
        cfg.search.push_back(row);
      }
    } else if (sec == "algorithm") {
      for (const auto& [key, val] : entries) {
        const std::string where = origin + ": [algorithm] " + key;
        if (key == "np_pf")
          cfg.alg.np_pf = detail::config_count(val, where);
        else if (key == "nrep_pf")
          cfg.alg.nrep_pf = detail::config_count(val, where);
        else if (key == "np_if")
          cfg.alg.np_if = detail::config_count(val, where);
        else if (key == "nrep_if")
          cfg.alg.nrep_if = detail::config_count(val, where);
        else if (key == "nmif")
          cfg.alg.nmif = detail::config_count(val, where);
        else if (key == "np_if_u")
          cfg.alg.np_if_u = detail::config_count(val, where);
        else if (key == "nrep_pf_u")
          cfg.alg.nrep_pf_u = detail::config_count(val, where);
        else if (key == "nmif_u")
          cfg.alg.nmif_u = detail::config_count(val, where);
        else if (key == "lambda")
          cfg.alg.lambda = detail::config_number(val, where);
        else if (key == "cool_joint")
          cfg.alg.cool_joint = detail::config_number(val, where);
        else if (key == "cool_marginal")
          cfg.alg.cool_marginal = detail::config_number(val, where);
        else if (key == "horizon")
          cfg.alg.horizon = detail::config_number(val, where);
        else if (key == "init_sigma_mult")
          cfg.alg.init_sigma_mult = detail::config_number(val, where);
        else if (key == "marginal") {
          if (val != "true" && val != "false")
            throw ConfigError(where + ": expected true or false");
          cfg.alg.marginal = val == "true";
        } else if (key == "resampler") {
          if (val == "systematic")
            cfg.alg.resampler = Resampler::systematic;
          else if (val == "multinomial")
            cfg.alg.resampler = Resampler::multinomial;
          else
            throw ConfigError(where + ": expected systematic or multinomial");
        } else
          throw ConfigError(where + ": unknown key");
      }
    } else if (sec == "profile") {
      for (const auto& [key, val] : entries) {
        const std::string where = origin + ": [profile] " + key;
        if (key == "parameter")
          cfg.profile_parameter = val;
        else if (key == "lo")
          cfg.profile_lo = detail::config_number(val, where);
        else if (key == "hi")
          cfg.profile_hi = detail::config_number(val, where);
        else if (key == "points")
          cfg.profile_points = detail::config_count(val, where);
        else if (key == "starts")
          cfg.profile_starts = detail::config_count(val, where);
        else if (key == "lambda")
          cfg.alg.lambda = detail::config_number(val, where);
        else if (key == "confidence")
          cfg.confidence = detail::config_number(val, where);
        else
          throw ConfigError(where + ": unknown key");
      }
    } else {
      throw ConfigError(origin + ": unknown section [" + sec + "]");
    }
  }

  if (!(cfg.alg.lambda > 0.0 && cfg.alg.lambda <= 1.0))
    throw ConfigError(origin + ": lambda must be in (0, 1]");
  if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
    throw ConfigError(origin + ": confidence must be in (0, 1)");
  if (cfg.alg.np_pf < 1 || cfg.alg.nrep_pf < 1 || cfg.alg.np_if < 1 || cfg.alg.nrep_if < 1)
    throw ConfigError(origin + ": particle and replicate counts must be >= 1");
  if (cfg.alg.marginal && (cfg.alg.np_if_u < 1 || cfg.alg.nrep_pf_u < 1))
    throw ConfigError(origin + ": marginal refinement needs np_if_u and nrep_pf_u >= 1");
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(is, path);
}

/// FNV-1a over the exact config bytes; recorded in the manifest so a rerun
/// can prove it used the same configuration.
inline std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace panelsmc

#endif  // PANELSMC_CONFIG_HPP
