#pragma once

#include <stdexcept>
#include <string>

namespace noisescope {

/// Argument outside the mathematical domain of an operation
/// (negative evolution time, non-density-matrix input, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid or incomplete configuration (missing Larmor frequency, bad grid).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Observed data has zero likelihood everywhere on the parameter grid.
class InconsistentDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fisher information is singular: a certain outcome whose probability
/// still depends on the parameter.
class SingularInformationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Binary-outcome data outside the model (e.g. non-positive contrast).
class OutOfModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Least-squares fit without a bracketable minimum.
class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace noisescope
