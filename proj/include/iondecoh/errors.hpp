#pragma once

#include <stdexcept>

namespace iondecoh {

/// Invalid run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integrator or stepper left its accuracy envelope (CLI exit code 3).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fock truncation too small for the requested state (CLI exit code 4).
struct LeakageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace iondecoh
