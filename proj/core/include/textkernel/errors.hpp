#pragma once

#include <stdexcept>

namespace textkernel {

/// Operand shapes or channel counts do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad or missing configuration, weight bundle or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace textkernel
