#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bezreach {

// Binomial coefficients overflow double precision beyond this order.
inline constexpr int kMaxOrder = 30;

// z(t) for an order-p curve on [0, T]; entry k is C(p,k) s^k (1-s)^(p-k).
Eigen::VectorXd bernstein_basis(int order, double duration, double t);

// Control points are the columns of an m x (p+1) matrix, so that
// b(t) = points * z(t).
class BezierCurve {
 public:
  BezierCurve(Eigen::MatrixXd points, double duration);

  int order() const { return static_cast<int>(points_.cols()) - 1; }
  int dim() const { return static_cast<int>(points_.rows()); }
  double duration() const { return duration_; }
  const Eigen::MatrixXd& points() const { return points_; }

  Eigen::VectorXd eval(double t) const;

  // Evaluates at many times at once (columns of the result), using the
  // de Casteljau kernel of the active SIMD variant.
  Eigen::MatrixXd eval_many(const Eigen::VectorXd& times) const;

  // Derivative expressed at the same order (points * H).
  BezierCurve derivative() const;

 private:
  Eigen::MatrixXd points_;
  double duration_;
};

// (p+1) x p. The order-(p-1) derivative curve has points * S.
Eigen::MatrixXd diff_matrix(int order, double duration);

// p x (p+1). Raises an order-(p-1) curve to order p: points * E.
Eigen::MatrixXd elevation_matrix(int order);

// (p+1) x (p+1) same-order derivative map, S * E.
Eigen::MatrixXd derivative_map(int order, double duration);

// Q_1..Q_k for the uniform k-refinement. Segment i of the curve has control
// points points * Q_i and, reparameterized to [0, T], equals the original
// on [(i-1)T/k, iT/k].
std::vector<Eigen::MatrixXd> split_matrices(int order, int segments);

// n x (p+1) state-curve matrix [p H^0; p H^1; ...; p H^(gamma-1)].
Eigen::MatrixXd state_curve_matrix(const Eigen::MatrixXd& points, int gamma,
                                   double duration);

// (p+1) x 2*gamma. points * D stacks the boundary derivatives
// [q(0) ... q^(gamma-1)(0), q(T) ... q^(gamma-1)(T)] as columns.
Eigen::MatrixXd boundary_matrix(int order, int gamma, double duration);

// 2*gamma x (p+1) matrix R with R * D = I, so boundary data X (m x 2*gamma)
// maps to control points X * R. Minimum-norm unless a positive definite
// (p+1) x (p+1) quadratic cost on the control points is supplied.
Eigen::MatrixXd boundary_inverse(
    const Eigen::MatrixXd& D,
    const std::optional<Eigen::MatrixXd>& regularizer = std::nullopt);

// Right inverse R of D whose curves minimize the squared control points of
// the gamma-th derivative. Unlike the minimum-norm inverse it is translation
// invariant, so boundary data of a constant curve give that constant curve.
// Equal to D^-1 when p = 2 gamma - 1.
Eigen::MatrixXd min_energy_boundary_inverse(int order, int gamma,
                                            double duration);

// Control points (m x (p+1)) meeting x(0) = x0 and x(T) = xT, where states
// stack output derivatives [q; q'; ...].
Eigen::MatrixXd solve_boundary(
    const Eigen::MatrixXd& D, const Eigen::VectorXd& x0,
    const Eigen::VectorXd& xT,
    const std::optional<Eigen::MatrixXd>& regularizer = std::nullopt);

// K with K * vec(A^T) = vec(A) for A of shape rows x cols.
Eigen::MatrixXd commutation_matrix(int rows, int cols);

struct VectorizationMaps {
  int order{};
  int gamma{};
  int m{};
  double duration{};
  Eigen::MatrixXd H_vec;   // vec(P) = H_vec * vec(p)
  Eigen::MatrixXd D_vec;   // [x(0); x(T)] = D_vec * vec(p)
  Eigen::MatrixXd K_comm;  // gamma(p+1) square, K * vec(A^T) = vec(A)
};

VectorizationMaps vectorization_maps(int order, int gamma, int m,
                                     double duration);

}  // namespace bezreach
