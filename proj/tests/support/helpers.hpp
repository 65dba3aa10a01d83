#ifndef PANELSMC_TESTS_HELPERS_HPP
#define PANELSMC_TESTS_HELPERS_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "panelsmc/models/gompertz.hpp"
#include "panelsmc/params.hpp"
#include "panelsmc/simulate.hpp"

namespace testutil {

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

inline double se(const std::vector<double>& v) {
  return sd(v) / std::sqrt(static_cast<double>(v.size()));
}

/// Gompertz generating values used across the filtering and search tests:
/// kappa = X0 = 1, r = sigmaG = 0.1, tau = 0.1 for every unit.
inline panelsmc::ParameterSet gompertz_truth(std::size_t n_units) {
  std::vector<std::string> labels(n_units);
  for (std::size_t u = 0; u < n_units; ++u) labels[u] = "unit" + std::to_string(u + 1);
  panelsmc::ParameterSet ps;
  ps.set_unit_labels(labels);
  ps.add_shared("kappa", 1.0);
  ps.add_shared("r", 0.1, panelsmc::TransformSpec::log());
  ps.add_shared("sigmaG", 0.1, panelsmc::TransformSpec::log());
  ps.add_specific_broadcast("tau", 0.1, panelsmc::TransformSpec::log());
  ps.add_shared("X0", 1.0);
  return ps;
}

inline panelsmc::PanelData gompertz_panel(std::size_t n_units, std::size_t n_obs,
                                          std::uint64_t seed) {
  const panelsmc::GompertzModel model;
  const panelsmc::ParameterSet truth = gompertz_truth(n_units);
  return panelsmc::simulate_panel(model, truth, panelsmc::regular_times(0.0, 1.0, n_obs), 0.0,
                                  {}, seed);
}

/// Scratch directory deleted on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& stem) {
    namespace fs = std::filesystem;
    path_ = (fs::temp_directory_path() / (stem + "-" + std::to_string(counter_++))).string();
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  static inline int counter_ = 0;
  std::string path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

}  // namespace testutil

#endif  // PANELSMC_TESTS_HELPERS_HPP
