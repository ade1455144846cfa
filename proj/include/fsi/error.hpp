#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidMeshError : public Error {
public:
  using Error::Error;
};

class MeshCompatibilityError : public Error {
public:
  using Error::Error;
};

/// Requested quadrature degree (or similar capability) is not available.
class CapabilityError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

/// NaN/Inf found in an input vector or forcing evaluation.
class NumericInputError : public Error {
public:
  using Error::Error;
};

class CouplingConstructionError : public Error {
public:
  using Error::Error;
};

class ConstraintConflictError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class SolverFailureError : public Error {
public:
  SolverFailureError(const std::string& what, int level, int iteration)
      : Error(what + " (n=" + std::to_string(level) + ", iteration " +
              std::to_string(iteration) + ")"),
        level_(level),
        iteration_(iteration) {}

  int level() const noexcept { return level_; }
  int iteration() const noexcept { return iteration_; }

private:
  int level_;
  int iteration_;
};

class NonconvergenceError : public Error {
public:
  NonconvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

}  // namespace fsi
