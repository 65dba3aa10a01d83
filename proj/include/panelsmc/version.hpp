#ifndef PANELSMC_VERSION_HPP
#define PANELSMC_VERSION_HPP

namespace panelsmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace panelsmc

#endif  // PANELSMC_VERSION_HPP
