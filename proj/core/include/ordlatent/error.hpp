#pragma once

#include <stdexcept>
#include <string>

namespace ordlatent {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad index, invalid parameters, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative procedure stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Inner latent-score solve failed for a specific observation.
class InnerSolveError : public ConvergenceError {
 public:
  InnerSolveError(int observation, const std::string& what)
      : ConvergenceError("observation " + std::to_string(observation) + ": " + what),
        observation_(observation) {}
  int observation() const noexcept { return observation_; }

 private:
  int observation_;
};

/// Some model quantity cannot be identified from the data.
class UnidentifiedError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, singular matrices and similar breakdowns.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ordlatent
