#pragma once

#include <stdexcept>
#include <string>

namespace edgerec {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (dataset files, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input that parses but violates a dataset invariant.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range or inconsistent configuration values.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Rejection sampling could not find a patch meeting the density floor.
class DensityInfeasibleError : public Error {
 public:
  DensityInfeasibleError(const std::string& what, double best_density)
      : Error(what), best_density_(best_density) {}
  double best_density() const { return best_density_; }

 private:
  double best_density_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class ConfigMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

/// Raised when training produces a non-finite loss.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace edgerec
