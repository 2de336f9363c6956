#pragma once

#include <stdexcept>
#include <string>

namespace novex {

/// Invalid configuration or mismatched dimensions. Fatal for a run.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value reached the optimizer or a training target.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace novex
