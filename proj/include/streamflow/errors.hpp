#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace streamflow {

// Invalid hyper-parameters, malformed config files, unknown keys.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain an operation is defined on (t outside [0,1],
// unsorted observation times, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures that come from floating point rather than from inputs.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateGramError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : NumericalError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class StiffnessError : public NumericalError {
 public:
  StiffnessError(double last_t, const std::string& what)
      : NumericalError(what), last_t_(last_t) {}
  double last_accepted_t() const noexcept { return last_t_; }

 private:
  double last_t_;
};

}  // namespace streamflow
