#pragma once

#include <stdexcept>
#include <string>

namespace tracerflow {

/// A NaN or infinity appeared in a state that must stay finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration document is malformed or violates a constraint. The message
/// names the offending field path (e.g. "simulation.dt").
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tracerflow
