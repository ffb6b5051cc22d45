#pragma once

#include <stdexcept>
#include <string>

namespace mocert {

/// Invalid parameter combination (e.g. beta + 2*alpha - 1 <= 0).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A builder could not satisfy its continuity / monotonicity constraints.
struct ConstructionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A quadrature failed to converge or hit a non-integrable singularity.
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An integral required by a functional diverges for the given inputs.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid field or solver input (e.g. non-solenoidal drift).
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Evaluation requested at a point where the quantity is singular
/// (e.g. omega'' at sigma = 0).
struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Missing or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mocert
