#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "latlab/types.hpp"

namespace latlab {

// Caller passed something malformed (bad dimension, non-finite value, ...).
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Experiment description is unusable (unknown family, missing field, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Request would exceed a hard resource cap (enumeration too large, ...).
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two internally redundant computations disagreed. Always a bug, never a
// recoverable condition.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Monotone iteration failed to settle within its step cap; carries the orbit
// prefix visited so far for diagnosis.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::vector<LatticeIndex> prefix)
      : std::runtime_error(what), visited(std::move(prefix)) {}
  std::vector<LatticeIndex> visited;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace latlab
