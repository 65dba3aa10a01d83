#ifndef PANELSMC_PANEL_DATA_HPP
#define PANELSMC_PANEL_DATA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/csv.hpp"

namespace panelsmc {

/// Time-indexed named real columns for one unit.  Storage and range checks
/// only; interpolation policy lives with each model, which calls the lookup
/// helpers below as it sees fit.
class CovariateTable {
 public:
  CovariateTable() = default;

  CovariateTable(std::vector<std::string> names, std::vector<double> times,
                 std::vector<std::vector<double>> columns)
      : names_(std::move(names)), times_(std::move(times)), columns_(std::move(columns)) {
    if (columns_.size() != names_.size())
      throw std::invalid_argument("covariate table: one column per name required");
    for (const auto& c : columns_)
      if (c.size() != times_.size())
        throw std::invalid_argument("covariate table: column length mismatch");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i - 1] < times_[i]))
        throw std::invalid_argument("covariate table: times must be strictly increasing");
  }

  bool empty() const { return times_.empty(); }
  std::size_t n_times() const { return times_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<double>& times() const { return times_; }

  bool has(const std::string& name) const { return index_of(name) >= 0; }

  double min_time() const { return times_.front(); }
  double max_time() const { return times_.back(); }

  /// Linear interpolation inside the table range; extrapolation is an error.
  /// Rounding drift up to 1e-9 beyond either end is clamped.
  double interpolate(const std::string& name, double t) const {
    const std::size_t c = require(name);
    if (times_.empty()) throw std::out_of_range("covariate table is empty");
    const double tol = 1e-9 * std::max(1.0, std::abs(times_.back()));
    if (t < times_.front() && t > times_.front() - tol) t = times_.front();
    if (t > times_.back() && t < times_.back() + tol) t = times_.back();
    if (t < times_.front() || t > times_.back())
      throw std::out_of_range("covariate time " + std::to_string(t) + " outside table range");
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    if (i < times_.size() && times_[i] == t) return columns_[c][i];
    const double t0 = times_[i - 1], t1 = times_[i];
    const double w = (t - t0) / (t1 - t0);
    return (1.0 - w) * columns_[c][i - 1] + w * columns_[c][i];
  }

  /// Value at the latest table time <= t (step-function lookup).
  double at_or_before(const std::string& name, double t) const {
    const std::size_t c = require(name);
    if (times_.empty() || t < times_.front())
      throw std::out_of_range("no covariate row at or before time " + std::to_string(t));
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return columns_[c][static_cast<std::size_t>(it - times_.begin()) - 1];
  }

 private:
  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return static_cast<int>(i);
    return -1;
  }
  std::size_t require(const std::string& name) const {
    const int i = index_of(name);
    if (i < 0) throw std::out_of_range("no covariate column '" + name + "'");
    return static_cast<std::size_t>(i);
  }

  std::vector<std::string> names_;
  std::vector<double> times_;
  std::vector<std::vector<double>> columns_;
};

/// One unit's observation record.
struct UnitData {
  std::string label;
  double t0 = 0.0;
  std::vector<double> times;              // t_1 < t_2 < ... < t_N
  std::vector<std::vector<double>> obs;   // obs[n] is the observation vector at times[n]
  CovariateTable covariates;              // may be empty

  std::size_t n_obs() const { return times.size(); }
};

struct PanelData {
  std::vector<UnitData> units;
  std::vector<std::string> obs_names;     // observation column names, shared across units

  std::size_t n_units() const { return units.size(); }

  const UnitData& unit(std::size_t u) const { return units.at(u); }

  std::vector<std::string> unit_labels() const {
    std::vector<std::string> out;
    out.reserve(units.size());
    for (const auto& r : units) out.push_back(r.label);
    return out;
  }
};

// ---- validation ------------------------------------------------------------

struct ValidationReport {
  struct Violation {
    std::string unit;
    std::string message;
  };
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

inline std::ostream& operator<<(std::ostream& os, const ValidationReport& r) {
  if (r.ok()) return os << "panel: ok\n";
  for (const auto& v : r.violations) os << "unit " << v.unit << ": " << v.message << "\n";
  return os;
}

/// Structural checks: nonempty units, strictly increasing times, t0 before
/// the first observation, observation dimension consistent with the model,
/// covariate coverage of [t0, t_N] when a table is present.
template <class Model>
ValidationReport validate_panel(const PanelData& pd, const Model& model) {
  ValidationReport rep;
  auto fail = [&](const std::string& unit, std::string msg) {
    rep.violations.push_back({unit, std::move(msg)});
  };
  if (pd.units.empty()) fail("<panel>", "no units");
  for (const auto& ud : pd.units) {
    if (ud.n_obs() == 0) {
      fail(ud.label, "no observations");
      continue;
    }
    if (!(ud.t0 <= ud.times.front())) fail(ud.label, "t0 exceeds first observation time");
    for (std::size_t n = 1; n < ud.times.size(); ++n)
      if (!(ud.times[n - 1] < ud.times[n])) {
        fail(ud.label, "non-increasing times at index " + std::to_string(n));
        break;
      }
    for (std::size_t n = 0; n < ud.obs.size(); ++n)
      if (ud.obs[n].size() != model.obs_dim()) {
        fail(ud.label, "observation dimension mismatch at index " + std::to_string(n));
        break;
      }
    if (ud.obs.size() != ud.times.size()) fail(ud.label, "times/observations length mismatch");
    if (!ud.covariates.empty()) {
      if (ud.covariates.min_time() > ud.t0 || ud.covariates.max_time() < ud.times.back())
        fail(ud.label, "covariate table does not cover [t0, t_N]");
    }
  }
  return rep;
}

// ---- CSV IO ----------------------------------------------------------------
//
// Panel CSV: header `unit,time,<obs columns>`, rows sorted by (unit, time).
// Covariate CSV: header `unit,time,<covariate columns>`.

/// t0 policy when the data file carries no explicit initial times: one
/// observation-spacing before the first observation, or a fixed value.
struct T0Policy {
  enum class Kind { first_minus_dt, fixed };
  Kind kind = Kind::first_minus_dt;
  double fixed = 0.0;

  double resolve(const std::vector<double>& times) const {
    if (kind == Kind::fixed) return fixed;
    if (times.size() >= 2) return times[0] - (times[1] - times[0]);
    return times.at(0) - 1.0;
  }
};

inline PanelData read_panel_csv(const std::string& path, T0Policy t0 = {}) {
  const csv::Table t = csv::read_table(path);
  const int cu = t.require_column("unit", path);
  const int ct = t.require_column("time", path);
  PanelData pd;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (static_cast<int>(i) != cu && static_cast<int>(i) != ct)
      pd.obs_names.push_back(t.header[i]);
  if (pd.obs_names.empty()) throw std::runtime_error(path + ": no observation columns");

  UnitData* cur = nullptr;
  for (const auto& row : t.rows) {
    const std::string& label = row[static_cast<std::size_t>(cu)];
    if (cur == nullptr || cur->label != label) {
      for (const auto& ud : pd.units)
        if (ud.label == label)
          throw std::runtime_error(path + ": rows for unit '" + label + "' are not contiguous");
      pd.units.push_back(UnitData{});
      cur = &pd.units.back();
      cur->label = label;
    }
    cur->times.push_back(csv::parse_double(row[static_cast<std::size_t>(ct)], path));
    std::vector<double> y;
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (static_cast<int>(i) != cu && static_cast<int>(i) != ct)
        y.push_back(csv::parse_double(row[i], path));
    cur->obs.push_back(std::move(y));
  }
  for (auto& ud : pd.units) {
    for (std::size_t n = 1; n < ud.times.size(); ++n)
      if (!(ud.times[n - 1] < ud.times[n]))
        throw std::runtime_error(path + ": unit '" + ud.label +
                                 "' times not strictly increasing");
    ud.t0 = t0.resolve(ud.times);
  }
  return pd;
}

inline void write_panel_csv(const PanelData& pd, std::ostream& os) {
  os << "unit,time";
  for (const auto& n : pd.obs_names) os << "," << n;
  os << "\n";
  for (const auto& ud : pd.units)
    for (std::size_t n = 0; n < ud.n_obs(); ++n) {
      os << ud.label << "," << csv::format_double(ud.times[n]);
      for (double v : ud.obs[n]) os << "," << csv::format_double(v);
      os << "\n";
    }
}

inline void write_panel_csv(const PanelData& pd, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_panel_csv(pd, os);
}

/// Reads per-unit covariate tables and attaches them to matching panel
/// units.  Units absent from the covariate file keep an empty table.
inline void read_covariate_csv(const std::string& path, PanelData& pd) {
  const csv::Table t = csv::read_table(path);
  const int cu = t.require_column("unit", path);
  const int ct = t.require_column("time", path);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (static_cast<int>(i) != cu && static_cast<int>(i) != ct) names.push_back(t.header[i]);
  if (names.empty()) throw std::runtime_error(path + ": no covariate columns");

  std::map<std::string, std::pair<std::vector<double>, std::vector<std::vector<double>>>> per_unit;
  for (const auto& row : t.rows) {
    auto& [times, cols] = per_unit[row[static_cast<std::size_t>(cu)]];
    if (cols.empty()) cols.resize(names.size());
    times.push_back(csv::parse_double(row[static_cast<std::size_t>(ct)], path));
    std::size_t k = 0;
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (static_cast<int>(i) != cu && static_cast<int>(i) != ct)
        cols[k++].push_back(csv::parse_double(row[i], path));
  }
  for (auto& ud : pd.units) {
    const auto it = per_unit.find(ud.label);
    if (it == per_unit.end()) continue;
    ud.covariates = CovariateTable(names, it->second.first, it->second.second);
  }
}

inline void write_covariate_csv(const PanelData& pd, std::ostream& os) {
  const CovariateTable* first = nullptr;
  for (const auto& ud : pd.units)
    if (!ud.covariates.empty()) { first = &ud.covariates; break; }
  if (first == nullptr) throw std::runtime_error("no covariate tables to write");
  os << "unit,time";
  for (const auto& n : first->names()) os << "," << n;
  os << "\n";
  for (const auto& ud : pd.units) {
    if (ud.covariates.empty()) continue;
    for (std::size_t i = 0; i < ud.covariates.n_times(); ++i) {
      const double t = ud.covariates.times()[i];
      os << ud.label << "," << csv::format_double(t);
      for (const auto& n : first->names()) os << "," << csv::format_double(ud.covariates.interpolate(n, t));
      os << "\n";
    }
  }
}

}  // namespace panelsmc

#endif  // PANELSMC_PANEL_DATA_HPP
