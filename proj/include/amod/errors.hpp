#pragma once

#include <stdexcept>
#include <string>

namespace amod {

// Dimension or index mismatch between containers that must agree.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad scenario / command configuration.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Solver failed in a way that is a bug or an unusable input (not plain
// infeasibility, which is reported through Solution::status).
class SolveError : public std::runtime_error {
 public:
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

// Branch-and-bound ran out of its node budget.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// A solution expected to be integral is not; carries the worst offender.
class IntegralityError : public std::runtime_error {
 public:
  IntegralityError(const std::string& variable, double value, const std::string& what)
      : std::runtime_error(what), variable_(variable), value_(value) {}
  const std::string& variable() const { return variable_; }
  double value() const { return value_; }

 private:
  std::string variable_;
  double value_;
};

// Demand trace parse / ordering problems.
class TraceError : public std::runtime_error {
 public:
  explicit TraceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace amod
