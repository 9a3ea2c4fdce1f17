#pragma once

#include <stdexcept>
#include <string>

namespace lowmach {

// Every error raised by the library derives from Error so callers can map
// failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a constitutive function (negative density...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Evaluation at a removable-in-theory but numerically singular point.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Holes that do not fit, holes touching the outer wall, and similar.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// The grid does not resolve a feature the operation depends on.
class ResolutionError : public Error {
 public:
  ResolutionError(const std::string& what, double required_h)
      : Error(what), required_h_(required_h) {}
  double required_h() const noexcept { return required_h_; }

 private:
  double required_h_;
};

/// Iterative solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Positivity loss or non-finite values during time stepping.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Not enough usable samples for a log-log regression.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Fields defined on incompatible grids.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Trajectories sampled at different times.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Bad or missing configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input the operator does not support (general W^{1,p}_0 fields for the
/// restriction operator, for example).
class UnsupportedInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace lowmach
