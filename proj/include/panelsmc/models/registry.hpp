#ifndef PANELSMC_MODELS_REGISTRY_HPP
#define PANELSMC_MODELS_REGISTRY_HPP

#include <stdexcept>
#include <string>
#include <utility>

#include "panelsmc/models/contacts.hpp"
#include "panelsmc/models/gompertz.hpp"
#include "panelsmc/models/polio.hpp"

namespace panelsmc {

/// Dispatches f on the model type named by id ("gompertz" | "polio" |
/// "contacts").  Models are stateless, so a fresh instance is passed.
template <class F>
decltype(auto) with_model(const std::string& id, F&& f) {
  if (id == "gompertz") return std::forward<F>(f)(GompertzModel{});
  if (id == "polio") return std::forward<F>(f)(PolioModel{});
  if (id == "contacts") return std::forward<F>(f)(ContactsModel{});
  throw std::invalid_argument("unknown model id '" + id +
                              "' (expected gompertz, polio, or contacts)");
}

inline bool known_model(const std::string& id) {
  return id == "gompertz" || id == "polio" || id == "contacts";
}

}  // namespace panelsmc

#endif  // PANELSMC_MODELS_REGISTRY_HPP
