#include "bezreach/errors.h"

#include <sstream>

namespace bezreach {

InsufficientOrderError::InsufficientOrderError(int order, int gamma)
    : Error("curve order " + std::to_string(order) +
            " is below 2*gamma-1 = " + std::to_string(2 * gamma - 1) +
            " required to meet boundary values for gamma = " +
            std::to_string(gamma)),
      order_(order),
      gamma_(gamma) {}

namespace {
std::string format_double(double value) {
  std::ostringstream out;
  out.precision(6);
  out << value;
  return out.str();
}
}  // namespace

SingularityError::SingularityError(double condition_number)
    : Error("actuation matrix is singular (condition number " +
            format_double(condition_number) + ")"),
      condition_number_(condition_number) {}

InfeasibleCertificateError::InfeasibleCertificateError(double deficit)
    : Error("tracking certificate exhausts the input bound: u_max - K(x_ref) "
            "falls short by " +
            format_double(deficit)),
      deficit_(deficit) {}

InfeasibleReductionError::InfeasibleReductionError(int row,
                                                   const std::string& detail)
    : Error("constraint row " + std::to_string(row) +
            " admits no point of the sigma box: " + detail),
      row_(row) {}

UnreachableGoalError::UnreachableGoalError(int start, int goal,
                                           int component_size)
    : Error("goal vertex " + std::to_string(goal) +
            " is unreachable from vertex " + std::to_string(start) +
            "; reachable component has " + std::to_string(component_size) +
            " vertices"),
      component_size_(component_size) {}

ConfigError::ConfigError(const std::string& path, const std::string& message)
    : Error(path + ": " + message), path_(path) {}

}  // namespace bezreach
