#pragma once

#include <optional>

#include <Eigen/Dense>

namespace bezreach {

inline constexpr double kLpTolerance = 1e-8;

// {x | A x <= b}
class Polytope {
 public:
  // The whole space R^dim (no rows).
  explicit Polytope(int dim = 0);
  Polytope(Eigen::MatrixXd A, Eigen::VectorXd b);

  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }

  // max_i (A x - b)_i, or -inf without rows.
  double max_violation(const Eigen::VectorXd& x) const;
  bool contains(const Eigen::VectorXd& x, double tol = kLpTolerance) const;

  Polytope intersect(const Polytope& other) const;

 private:
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
};

struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

// A point of P (A x <= b + 1e-8 per unit-norm row), or nothing if P is empty.
// The search is confined to a large box around the origin scaled by |b|
// (at most 1e8); rows that cannot bind inside it are ignored.
std::optional<Eigen::VectorXd> feasible(const Polytope& P);

struct ChebyshevBall {
  Eigen::VectorXd center;
  double radius{};  // Euclidean; zero for flat polytopes
};

// Largest inscribed Euclidean ball, or nothing if P is empty.
std::optional<ChebyshevBall> chebyshev_center(const Polytope& P);

enum class LpStatus { kOptimal, kUnbounded, kInfeasible };

struct LpResult {
  LpStatus status{LpStatus::kInfeasible};
  double value{};
  Eigen::VectorXd argmax;
};

// max c^T x over P.
LpResult maximize(const Polytope& P, const Eigen::VectorXd& c);

// Tightest axis-aligned box around P (2n LPs); infinite sides where P is
// unbounded. Nothing if P is empty.
std::optional<Box> bounding_box(const Polytope& P);

// Removes rows that hold everywhere on `box`. When box contains P the result
// describes the same set.
Polytope drop_rows_implied_by_box(const Polytope& P, const Box& box);

namespace internal {

// min c^T y s.t. E y = f, y >= 0 by the two-phase tableau simplex.
struct SimplexResult {
  LpStatus status{LpStatus::kInfeasible};
  Eigen::VectorXd y;
  Eigen::VectorXd duals;  // pi with E^T pi <= c, complementary to y
  double objective{};
  int iterations{};
};

SimplexResult solve_standard_form(const Eigen::MatrixXd& E,
                                  const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& c);

}  // namespace internal
}  // namespace bezreach
