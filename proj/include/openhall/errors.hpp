#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace openhall {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad inputs: non-Hermitian matrices, negative rates, index out of range.
struct ValidationError : Error {
  using Error::Error;
};

// Band touching or vanishing gap at a k-point.
struct DegeneratePoint : Error {
  using Error::Error;
};

struct SolverError : Error {
  using Error::Error;
};

struct NonUniqueResponse : SolverError {
  NonUniqueResponse(const std::string& what, int null_dim)
      : SolverError(what), null_dimension(null_dim) {}
  int null_dimension;
};

// Remainder of a finite-field probe does not scale quadratically.
struct NonlinearResponse : Error {
  NonlinearResponse(const std::string& what, double exponent)
      : Error(what), exponent(exponent) {}
  double exponent;
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, std::vector<double> history = {})
      : Error(what), history(std::move(history)) {}
  std::vector<double> history;
};

// Too many degenerate cells in a quadrature grid.
struct ExclusionError : ConvergenceError {
  using ConvergenceError::ConvergenceError;
};

// Plaquette sum not close enough to an integer.
struct ResolutionError : Error {
  ResolutionError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace openhall
