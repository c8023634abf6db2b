#pragma once

#include <stdexcept>
#include <string>

namespace scdm {

// Invalid user-facing configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Loss or parameters became NaN/Inf during training (CLI exit code 3).
class NumericalDivergence : public std::runtime_error {
 public:
  explicit NumericalDivergence(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace scdm
