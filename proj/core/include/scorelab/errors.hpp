#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace scorelab {

// Argument outside its documented domain (t outside [0,T], v outside the
// variance range, invalid configuration values).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operation evaluated at t = 0 where sigma(t) = 0 and the quantity is singular.
struct SingularTimeError : std::domain_error {
  SingularTimeError()
      : std::domain_error("singular time: sigma(0) = 0, quantity undefined at t = 0") {}
  explicit SingularTimeError(const std::string& what) : std::domain_error(what) {}
};

// Conditional score queried at an observation that is not in the marginal
// dataset; the empirical minimizer is undefined there.
struct UndefinedObservationError : std::domain_error {
  UndefinedObservationError()
      : std::domain_error("observation not in the marginal dataset; conditional score undefined") {}
};

// Dataset violates a structural requirement (duplicate points where
// distinctness is required, size/dimension mismatches).
struct InvalidDatasetError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A trajectory left the admissible region; carries the last finite node.
struct DivergenceError : std::runtime_error {
  double last_time;
  Eigen::VectorXd last_state;
  DivergenceError(const std::string& what, double t, Eigen::VectorXd state)
      : std::runtime_error(what), last_time(t), last_state(std::move(state)) {}
};

// Training produced a non-finite loss.
struct TrainingDivergedError : std::runtime_error {
  int epoch;
  TrainingDivergedError(const std::string& what, int at_epoch)
      : std::runtime_error(what), epoch(at_epoch) {}
};

// Rate fit requested for a trajectory whose terminal is not near any data point.
struct NotCollapsedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace scorelab
