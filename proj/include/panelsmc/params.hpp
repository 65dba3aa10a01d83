#ifndef PANELSMC_PARAMS_HPP
#define PANELSMC_PARAMS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "panelsmc/csv.hpp"

namespace panelsmc {

/// Bijection between a parameter's natural scale and the unconstrained
/// estimation scale used by perturbation and optimization.
struct TransformSpec {
  enum class Kind { identity, log, logit };

  Kind kind = Kind::identity;
  double lo = 0.0;  // logit bounds; ignored otherwise
  double hi = 1.0;

  static TransformSpec identity() { return {Kind::identity, 0.0, 1.0}; }
  static TransformSpec log() { return {Kind::log, 0.0, 1.0}; }
  static TransformSpec logit(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("logit transform needs lo < hi");
    return {Kind::logit, lo, hi};
  }

  double to_estimation(double x) const {
    switch (kind) {
      case Kind::identity: return x;
      case Kind::log:
        if (!(x > 0.0)) throw std::domain_error("log transform needs x > 0");
        return std::log(x);
      case Kind::logit: {
        if (!(x > lo && x < hi)) throw std::domain_error("logit transform needs lo < x < hi");
        const double p = (x - lo) / (hi - lo);
        return std::log(p / (1.0 - p));
      }
    }
    return x;
  }

  // Inverse maps land strictly inside the natural domain even when the
  // estimation-scale value overflows, so downstream positivity and bound
  // invariants hold for any finite input.
  double to_natural(double z) const {
    switch (kind) {
      case Kind::identity: return z;
      case Kind::log: {
        double x = std::exp(z);
        if (x <= 0.0) x = std::numeric_limits<double>::min();
        return x;
      }
      case Kind::logit: {
        const double p = 1.0 / (1.0 + std::exp(-z));
        double x = lo + p * (hi - lo);
        if (x <= lo) x = std::nextafter(lo, hi);
        if (x >= hi) x = std::nextafter(hi, lo);
        return x;
      }
    }
    return z;
  }

  bool operator==(const TransformSpec& o) const {
    return kind == o.kind && (kind != Kind::logit || (lo == o.lo && hi == o.hi));
  }
};

inline std::string transform_name(const TransformSpec& t) {
  switch (t.kind) {
    case TransformSpec::Kind::identity: return "identity";
    case TransformSpec::Kind::log: return "log";
    case TransformSpec::Kind::logit: return "logit";
  }
  return "identity";
}

/// Panel parameter vector theta = (shared phi, unit-specific psi_1..psi_U),
/// with one transform per named coordinate.
///
/// The estimation-scale flat layout is [shared 0..A-1][unit 0's B
/// specifics][unit 1's B specifics]...; every estimated or fixed coordinate
/// appears, fixed ones simply never receive perturbation.
class ParameterSet {
 public:
  ParameterSet() = default;
  explicit ParameterSet(std::vector<std::string> unit_labels)
      : unit_labels_(std::move(unit_labels)) {}

  void set_unit_labels(std::vector<std::string> labels) {
    if (!specific_values_.empty() && labels.size() != n_units())
      throw std::invalid_argument("unit label count conflicts with existing specific values");
    unit_labels_ = std::move(labels);
  }

  void add_shared(const std::string& name, double value,
                  TransformSpec tf = TransformSpec::identity()) {
    check_new_name(name);
    shared_names_.push_back(name);
    shared_values_.push_back(value);
    shared_tf_.push_back(tf);
  }

  /// One value per unit, ordered like unit_labels().
  void add_specific(const std::string& name, std::vector<double> values,
                    TransformSpec tf = TransformSpec::identity()) {
    check_new_name(name);
    if (unit_labels_.empty())
      throw std::logic_error("set_unit_labels before add_specific");
    if (values.size() != unit_labels_.size())
      throw std::invalid_argument("specific parameter '" + name + "' needs one value per unit");
    specific_names_.push_back(name);
    specific_values_.push_back(std::move(values));
    specific_tf_.push_back(tf);
  }

  void add_specific_broadcast(const std::string& name, double value,
                              TransformSpec tf = TransformSpec::identity()) {
    add_specific(name, std::vector<double>(unit_labels_.size(), value), tf);
  }

  std::size_t n_shared() const { return shared_names_.size(); }
  std::size_t n_specific() const { return specific_names_.size(); }
  std::size_t n_units() const { return unit_labels_.size(); }
  std::size_t flat_dim() const { return n_shared() + n_units() * n_specific(); }

  const std::vector<std::string>& shared_names() const { return shared_names_; }
  const std::vector<std::string>& specific_names() const { return specific_names_; }
  const std::vector<std::string>& unit_labels() const { return unit_labels_; }

  bool has(const std::string& name) const {
    return find(shared_names_, name) >= 0 || find(specific_names_, name) >= 0;
  }
  bool is_shared(const std::string& name) const { return find(shared_names_, name) >= 0; }
  bool is_specific(const std::string& name) const { return find(specific_names_, name) >= 0; }

  double& shared_value(const std::string& name) {
    return shared_values_[require(shared_names_, name, "shared")];
  }
  double shared_value(const std::string& name) const {
    return shared_values_[require(shared_names_, name, "shared")];
  }
  double& specific_value(const std::string& name, std::size_t u) {
    return specific_values_[require(specific_names_, name, "unit-specific")].at(u);
  }
  double specific_value(const std::string& name, std::size_t u) const {
    return specific_values_[require(specific_names_, name, "unit-specific")].at(u);
  }

  /// Natural-scale value of `name` as seen by unit u (shared or specific).
  double value_for_unit(const std::string& name, std::size_t u) const {
    const int s = find(shared_names_, name);
    if (s >= 0) return shared_values_[s];
    const int p = find(specific_names_, name);
    if (p >= 0) return specific_values_[p].at(u);
    throw std::out_of_range("unknown parameter '" + name + "'");
  }

  TransformSpec transform(const std::string& name) const {
    const int s = find(shared_names_, name);
    if (s >= 0) return shared_tf_[s];
    const int p = find(specific_names_, name);
    if (p >= 0) return specific_tf_[p];
    throw std::out_of_range("unknown parameter '" + name + "'");
  }

  void set_transform(const std::string& name, TransformSpec tf) {
    const int s = find(shared_names_, name);
    if (s >= 0) { shared_tf_[s] = tf; return; }
    const int p = find(specific_names_, name);
    if (p >= 0) { specific_tf_[p] = tf; return; }
    throw std::out_of_range("unknown parameter '" + name + "'");
  }

  // ---- flat estimation-scale layout ---------------------------------------

  std::size_t flat_index_shared(std::size_t a) const { return a; }
  std::size_t flat_index_specific(std::size_t b, std::size_t u) const {
    return n_shared() + u * n_specific() + b;
  }

  /// Transform of flat coordinate i.
  const TransformSpec& flat_transform(std::size_t i) const {
    if (i < n_shared()) return shared_tf_[i];
    return specific_tf_[(i - n_shared()) % n_specific()];
  }

  /// Name of flat coordinate i (without unit qualification).
  const std::string& flat_name(std::size_t i) const {
    if (i < n_shared()) return shared_names_[i];
    return specific_names_[(i - n_shared()) % n_specific()];
  }

  /// Unit owning flat coordinate i, or npos for shared coordinates.
  std::size_t flat_unit(std::size_t i) const {
    if (i < n_shared()) return static_cast<std::size_t>(-1);
    return (i - n_shared()) / n_specific();
  }

  std::vector<double> flatten() const {
    std::vector<double> x(flat_dim());
    for (std::size_t a = 0; a < n_shared(); ++a)
      x[a] = named_to_estimation(shared_tf_[a], shared_values_[a], shared_names_[a]);
    for (std::size_t u = 0; u < n_units(); ++u)
      for (std::size_t b = 0; b < n_specific(); ++b)
        x[flat_index_specific(b, u)] =
            named_to_estimation(specific_tf_[b], specific_values_[b][u], specific_names_[b]);
    return x;
  }

  void unflatten(const std::vector<double>& x) {
    if (x.size() != flat_dim()) throw std::invalid_argument("flat vector has wrong dimension");
    for (std::size_t a = 0; a < n_shared(); ++a)
      shared_values_[a] = shared_tf_[a].to_natural(x[a]);
    for (std::size_t u = 0; u < n_units(); ++u)
      for (std::size_t b = 0; b < n_specific(); ++b)
        specific_values_[b][u] = specific_tf_[b].to_natural(x[flat_index_specific(b, u)]);
  }

  bool same_structure(const ParameterSet& o) const {
    return shared_names_ == o.shared_names_ && specific_names_ == o.specific_names_ &&
           unit_labels_ == o.unit_labels_;
  }

 private:
  static double named_to_estimation(const TransformSpec& tf, double v, const std::string& name) {
    try {
      return tf.to_estimation(v);
    } catch (const std::domain_error& e) {
      throw std::domain_error("parameter '" + name + "': " + e.what());
    }
  }
  static int find(const std::vector<std::string>& v, const std::string& name) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == name) return static_cast<int>(i);
    return -1;
  }
  static std::size_t require(const std::vector<std::string>& v, const std::string& name,
                             const char* kind) {
    const int i = find(v, name);
    if (i < 0) throw std::out_of_range(std::string("no ") + kind + " parameter '" + name + "'");
    return static_cast<std::size_t>(i);
  }
  void check_new_name(const std::string& name) const {
    if (name.empty()) throw std::invalid_argument("parameter name must be nonempty");
    if (has(name)) throw std::invalid_argument("duplicate parameter '" + name + "'");
  }

  std::vector<std::string> unit_labels_;
  std::vector<std::string> shared_names_;
  std::vector<double> shared_values_;
  std::vector<TransformSpec> shared_tf_;
  std::vector<std::string> specific_names_;
  std::vector<std::vector<double>> specific_values_;
  std::vector<TransformSpec> specific_tf_;
};

/// Values mapped through each coordinate's transform; structure unchanged.
inline ParameterSet to_estimation_scale(const ParameterSet& ps) {
  ParameterSet out = ps;
  std::vector<double> flat = ps.flatten();
  // Re-store transformed values directly (bypassing to_natural) by writing
  // through the named accessors on an identity view of the same structure.
  for (std::size_t a = 0; a < ps.n_shared(); ++a)
    out.shared_value(ps.shared_names()[a]) = flat[ps.flat_index_shared(a)];
  for (std::size_t u = 0; u < ps.n_units(); ++u)
    for (std::size_t b = 0; b < ps.n_specific(); ++b)
      out.specific_value(ps.specific_names()[b], u) = flat[ps.flat_index_specific(b, u)];
  return out;
}

inline ParameterSet from_estimation_scale(const ParameterSet& ps) {
  ParameterSet out = ps;
  for (std::size_t a = 0; a < ps.n_shared(); ++a) {
    const std::string& n = ps.shared_names()[a];
    out.shared_value(n) = ps.transform(n).to_natural(ps.shared_value(n));
  }
  for (std::size_t u = 0; u < ps.n_units(); ++u)
    for (std::size_t b = 0; b < ps.n_specific(); ++b) {
      const std::string& n = ps.specific_names()[b];
      out.specific_value(n, u) = ps.transform(n).to_natural(ps.specific_value(n, u));
    }
  return out;
}

/// Gathers the parameters a model sees for one unit, in the model's
/// declared name order, from either the set itself or a flat vector.
class UnitParamView {
 public:
  UnitParamView() = default;

  UnitParamView(const ParameterSet& ps, const std::vector<std::string>& model_names,
                std::size_t u) {
    idx_.reserve(model_names.size());
    tf_.reserve(model_names.size());
    for (const std::string& name : model_names) {
      if (ps.is_shared(name)) {
        std::size_t a = 0;
        while (ps.shared_names()[a] != name) ++a;
        idx_.push_back(ps.flat_index_shared(a));
      } else if (ps.is_specific(name)) {
        std::size_t b = 0;
        while (ps.specific_names()[b] != name) ++b;
        idx_.push_back(ps.flat_index_specific(b, u));
      } else {
        throw std::out_of_range("model parameter '" + name + "' missing from parameter set");
      }
      tf_.push_back(ps.transform(name));
    }
  }

  std::size_t size() const { return idx_.size(); }

  /// Natural-scale model parameters from an estimation-scale flat vector.
  void gather(const double* flat, double* out) const {
    for (std::size_t k = 0; k < idx_.size(); ++k) out[k] = tf_[k].to_natural(flat[idx_[k]]);
  }

  const std::vector<std::size_t>& flat_indices() const { return idx_; }

 private:
  std::vector<std::size_t> idx_;
  std::vector<TransformSpec> tf_;
};

/// Natural-scale parameter vector for unit u in the given name order.
inline std::vector<double> unit_parameters(const ParameterSet& ps,
                                           const std::vector<std::string>& model_names,
                                           std::size_t u) {
  std::vector<double> out(model_names.size());
  for (std::size_t k = 0; k < model_names.size(); ++k)
    out[k] = ps.value_for_unit(model_names[k], u);
  return out;
}

// ---- parameter file IO -----------------------------------------------------
//
// One coordinate per line: name,scope,value,transform[,lo,hi] with scope
// "shared" or "unit:<label>".  Specific parameters need a line for every
// unit.  A leading "name,scope,..." header line is tolerated on read.

inline void write_parameter_file(const ParameterSet& ps, std::ostream& os) {
  os << "name,scope,value,transform,lo,hi\n";
  for (std::size_t a = 0; a < ps.n_shared(); ++a) {
    const std::string& n = ps.shared_names()[a];
    const TransformSpec tf = ps.transform(n);
    os << n << ",shared," << csv::format_double(ps.shared_value(n)) << ","
       << transform_name(tf);
    if (tf.kind == TransformSpec::Kind::logit)
      os << "," << csv::format_double(tf.lo) << "," << csv::format_double(tf.hi);
    os << "\n";
  }
  for (std::size_t b = 0; b < ps.n_specific(); ++b) {
    const std::string& n = ps.specific_names()[b];
    const TransformSpec tf = ps.transform(n);
    for (std::size_t u = 0; u < ps.n_units(); ++u) {
      os << n << ",unit:" << ps.unit_labels()[u] << ","
         << csv::format_double(ps.specific_value(n, u)) << "," << transform_name(tf);
      if (tf.kind == TransformSpec::Kind::logit)
        os << "," << csv::format_double(tf.lo) << "," << csv::format_double(tf.hi);
      os << "\n";
    }
  }
}

inline void write_parameter_file(const ParameterSet& ps, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_parameter_file(ps, os);
}

inline ParameterSet read_parameter_file(std::istream& is) {
  struct Row {
    std::string name, label;
    bool shared;
    double value;
    TransformSpec tf;
  };
  std::vector<Row> rows;
  std::vector<std::string> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto f = csv::split_line(line);
    if (lineno == 1 && !f.empty() && f[0] == "name") continue;
    if (f.size() < 4)
      throw std::runtime_error("parameter file line " + std::to_string(lineno) +
                               ": expected name,scope,value,transform[,lo,hi]");
    Row r;
    r.name = f[0];
    if (f[1] == "shared") {
      r.shared = true;
    } else if (f[1].rfind("unit:", 0) == 0) {
      r.shared = false;
      r.label = f[1].substr(5);
      if (std::find(labels.begin(), labels.end(), r.label) == labels.end())
        labels.push_back(r.label);
    } else {
      throw std::runtime_error("parameter file line " + std::to_string(lineno) +
                               ": scope must be 'shared' or 'unit:<label>'");
    }
    r.value = std::stod(f[2]);
    if (f[3] == "identity") {
      r.tf = TransformSpec::identity();
    } else if (f[3] == "log") {
      r.tf = TransformSpec::log();
    } else if (f[3] == "logit") {
      if (f.size() < 6)
        throw std::runtime_error("parameter file line " + std::to_string(lineno) +
                                 ": logit needs lo,hi");
      r.tf = TransformSpec::logit(std::stod(f[4]), std::stod(f[5]));
    } else {
      throw std::runtime_error("parameter file line " + std::to_string(lineno) +
                               ": unknown transform '" + f[3] + "'");
    }
    rows.push_back(std::move(r));
  }

  ParameterSet ps(labels);
  for (const Row& r : rows)
    if (r.shared) ps.add_shared(r.name, r.value, r.tf);
  // Collect specific parameters in first-appearance order.
  std::vector<std::string> spec_names;
  for (const Row& r : rows)
    if (!r.shared && std::find(spec_names.begin(), spec_names.end(), r.name) == spec_names.end())
      spec_names.push_back(r.name);
  for (const std::string& n : spec_names) {
    std::vector<double> vals(labels.size(), std::numeric_limits<double>::quiet_NaN());
    TransformSpec tf;
    for (const Row& r : rows) {
      if (r.shared || r.name != n) continue;
      const auto it = std::find(labels.begin(), labels.end(), r.label);
      vals[static_cast<std::size_t>(it - labels.begin())] = r.value;
      tf = r.tf;
    }
    for (std::size_t u = 0; u < vals.size(); ++u)
      if (std::isnan(vals[u]))
        throw std::runtime_error("parameter '" + n + "' missing a value for unit '" + labels[u] +
                                 "'");
    ps.add_specific(n, std::move(vals), tf);
  }
  return ps;
}

inline ParameterSet read_parameter_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open parameter file '" + path + "'");
  return read_parameter_file(is);
}

}  // namespace panelsmc

#endif  // PANELSMC_PARAMS_HPP
