#pragma once

#include <stdexcept>
#include <string>

namespace chameleon {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid numeric input (non-finite angle, correlation outside [-1, 1], ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Station-1 dynamics evaluated where the weight vanishes (cos(sigma - a) == 0).
class SingularDynamics : public Error {
 public:
  using Error::Error;
};

/// Conditioned estimator asked for a ratio over zero coincidences.
class NoCoincidences : public Error {
 public:
  using Error::Error;
};

/// ExperimentConfig or CLI parameters violate their invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnknownSetting : public Error {
 public:
  using Error::Error;
};

/// A contextual model does not satisfy f_{1,c} = -f_{2,c} on the support of its state.
class SingletViolated : public Error {
 public:
  using Error::Error;
};

}  // namespace chameleon
