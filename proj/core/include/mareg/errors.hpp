#pragma once

#include <stdexcept>
#include <string>

namespace mareg {

/// Base class for input-validation failures. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument lies outside its admissible range (e.g. a weight outside [0, 1]).
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Matrix dimensions or structure (symmetry, squareness) do not match the contract.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The design matrix X does not have full column rank, or X'X is too ill-conditioned.
class RankDeficiencyError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Too few observations for the requested degrees of freedom (n - 1 - q, n - 2 - q, ...).
class DegreesOfFreedomError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An experiment plan's estimated cost exceeds the configured budget.
class CostLimitError : public ValidationError {
 public:
  CostLimitError(const std::string& what, double estimated_cost)
      : ValidationError(what), estimated_cost_(estimated_cost) {}
  double estimated_cost() const noexcept { return estimated_cost_; }

 private:
  double estimated_cost_;
};

}  // namespace mareg
