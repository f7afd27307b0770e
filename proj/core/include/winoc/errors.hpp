#pragma once

#include <stdexcept>
#include <string>

namespace winoc {

/// Invalid parameters: bad grid sizes, out-of-range counts, unstable thermal
/// constants, unknown config keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model (thermal or ANN) that cannot be used as constructed or loaded.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training diverged or was handed unusable data.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Query outside the domain a model was built for (e.g. prediction horizon).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A simulated protocol rule was broken (e.g. wireless transmit without the
/// token). Raised only when a caller drives the simulator incorrectly.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace winoc
