#pragma once

#include <stdexcept>
#include <string>

namespace bezreach {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (time outside
// [0, T], nonpositive duration, zero segment count, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Curve order too low to meet the requested boundary conditions.
class InsufficientOrderError : public Error {
 public:
  InsufficientOrderError(int order, int gamma);
  int order() const { return order_; }
  int gamma() const { return gamma_; }

 private:
  int order_;
  int gamma_;
};

// Actuation matrix not invertible at the evaluation point.
class SingularityError : public Error {
 public:
  explicit SingularityError(double condition_number);
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

// The tracking certificate consumes the whole input budget:
// u_max - e(0) - ||k(Psi(x), x, 0)|| <= 0.
class InfeasibleCertificateError : public Error {
 public:
  explicit InfeasibleCertificateError(double deficit);
  double deficit() const { return deficit_; }

 private:
  double deficit_;
};

// A mixed constraint row admits no point of the sigma box after reduction.
class InfeasibleReductionError : public Error {
 public:
  InfeasibleReductionError(int row, const std::string& detail);
  int row() const { return row_; }

 private:
  int row_;
};

// Mismatched dimensions between cooperating objects.
class StructuralError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class IterationLimitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Closed-loop state left the safety box around the constraint set.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UnreachableGoalError : public Error {
 public:
  UnreachableGoalError(int start, int goal, int component_size);
  int component_size() const { return component_size_; }

 private:
  int component_size_;
};

// A certified object failed its own re-check. Indicates a bug.
class InternalInconsistencyError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration; `path` is the JSON field path, e.g.
// "constraints.u_max".
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace bezreach
