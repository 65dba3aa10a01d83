#ifndef PANELSMC_MODEL_HPP
#define PANELSMC_MODEL_HPP

#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "panelsmc/panel_data.hpp"
#include "panelsmc/rng.hpp"

namespace panelsmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Plug-and-play unit model interface.
///
/// Algorithms touch the dynamics only through simulation (rinit, rprocess,
/// rmeasure) plus pointwise measurement log-densities (dmeasure); no
/// transition densities are ever evaluated.  Implementations must be
/// stateless: all randomness flows through the rng argument, so a model
/// object can be shared freely across concurrent tasks.
///
/// Contracts:
///   - rprocess(t, t) is the identity on state;
///   - dmeasure returns a finite real or -inf, never NaN;
///   - parameter vectors are natural-scale, ordered as param_names().
template <class M>
concept UnitModelC = requires(const M m, double* x, const double* cx, const double* p,
                              const double* y, const CovariateTable& cov, RngStream& rng,
                              double t, std::size_t n) {
  { m.state_dim() } -> std::convertible_to<std::size_t>;
  { m.obs_dim() } -> std::convertible_to<std::size_t>;
  { m.param_names() } -> std::convertible_to<const std::vector<std::string>&>;
  { m.rinit(p, cov, t, rng, x) };
  { m.rprocess(x, t, t, p, cov, rng) };
  { m.dmeasure(y, cx, t, n, p, cov) } -> std::convertible_to<double>;
  { m.rmeasure(cx, t, n, p, cov, rng, x) };
};

/// Index of a parameter in a model's declared order.
template <class M>
std::size_t param_index(const M& model, const std::string& name) {
  const auto& names = model.param_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw std::out_of_range("model has no parameter '" + name + "'");
}

}  // namespace panelsmc

#endif  // PANELSMC_MODEL_HPP
