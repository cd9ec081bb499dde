#include "bezreach/lp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bezreach/errors.h"
#include "bezreach/simd/kernels.h"

namespace bezreach {

Polytope::Polytope(int dim) : A_(0, dim), b_(0) {}

Polytope::Polytope(Eigen::MatrixXd A, Eigen::VectorXd b)
    : A_(std::move(A)), b_(std::move(b)) {
  if (A_.rows() != b_.size()) {
    throw StructuralError("polytope has " + std::to_string(A_.rows()) +
                          " rows but " + std::to_string(b_.size()) +
                          " right-hand sides");
  }
  if (!A_.allFinite() || !b_.allFinite()) {
    throw NumericalError("polytope has non-finite entries");
  }
}

double Polytope::max_violation(const Eigen::VectorXd& x) const {
  if (x.size() != A_.cols()) {
    throw StructuralError("point dimension does not match polytope");
  }
  return simd::kernels().max_residual(A_.data(), A_.rows(), A_.rows(),
                                      A_.cols(), x.data(), b_.data());
}

bool Polytope::contains(const Eigen::VectorXd& x, double tol) const {
  return max_violation(x) <= tol;
}

Polytope Polytope::intersect(const Polytope& other) const {
  if (other.dim() != dim()) {
    throw StructuralError("cannot intersect polytopes of different dimension");
  }
  Eigen::MatrixXd A(rows() + other.rows(), dim());
  Eigen::VectorXd b(rows() + other.rows());
  A << A_, other.A_;
  b << b_, other.b_;
  return Polytope(std::move(A), std::move(b));
}

namespace internal {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-10;
constexpr int kDegenerateBeforeBland = 50;

class Tableau {
 public:
  // Rows of (E, f) with f < 0 are negated so the artificial basis is
  // feasible; `sign` records the flips.
  Tableau(const Eigen::MatrixXd& E, const Eigen::VectorXd& f)
      : rows_(static_cast<int>(E.rows())),
        structural_(static_cast<int>(E.cols())),
        width_(structural_ + rows_ + 1),
        T_(RowMajor::Zero(rows_ + 1, width_)),
        sign_(rows_),
        basis_(rows_) {
    for (int i = 0; i < rows_; ++i) {
      sign_[i] = f(i) < 0 ? -1.0 : 1.0;
      T_.row(i).head(structural_) = sign_[i] * E.row(i);
      T_(i, structural_ + i) = 1.0;
      T_(i, width_ - 1) = sign_[i] * f(i);
      basis_[i] = structural_ + i;
    }
  }

  int rows() const { return rows_; }
  int structural() const { return structural_; }
  const std::vector<int>& basis() const { return basis_; }
  double sign(int i) const { return sign_[i]; }
  double rhs(int i) const { return T_(i, width_ - 1); }
  double objective() const { return -T_(rows_, width_ - 1); }

  void set_phase1_objective() {
    T_.row(rows_).setZero();
    for (int i = 0; i < rows_; ++i) {
      T_.row(rows_).head(structural_) -= T_.row(i).head(structural_);
      T_(rows_, width_ - 1) -= T_(i, width_ - 1);
    }
  }

  void set_phase2_objective(const Eigen::VectorXd& c) {
    T_.row(rows_).setZero();
    T_.row(rows_).head(structural_) = c.transpose();
    for (int i = 0; i < rows_; ++i) {
      const int var = basis_[i];
      const double cost = var < structural_ ? c(var) : 0.0;
      if (cost != 0.0) row_axpy(rows_, -cost, i);
    }
  }

  // Returns false on unboundedness, true at optimality.
  bool optimize(int& iterations, int max_iterations) {
    bool bland = false;
    int degenerate = 0;
    const double scale = std::max(1.0, T_.row(rows_).head(structural_)
                                           .cwiseAbs()
                                           .maxCoeff());
    const double opt_tol = 1e-11 * scale;
    while (true) {
      const int enter = choose_entering(bland, opt_tol);
      if (enter < 0) return true;
      const int leave = choose_leaving(enter, bland);
      if (leave < 0) return false;
      const double step = rhs(leave) / T_(leave, enter);
      if (step <= 1e-13) {
        if (++degenerate > kDegenerateBeforeBland) bland = true;
      } else {
        degenerate = 0;
      }
      pivot(leave, enter);
      if (++iterations > max_iterations) {
        throw IterationLimitError("simplex exceeded " +
                                  std::to_string(max_iterations) +
                                  " pivots with Bland's rule engaged");
      }
    }
  }

  // After phase 1, pivot zero-level artificials out of the basis where a
  // structural column allows it. Rows with no such column are redundant.
  void drive_out_artificials() {
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_) continue;
      int best = -1;
      double best_abs = 1e-9;
      for (int j = 0; j < structural_; ++j) {
        if (std::abs(T_(i, j)) > best_abs) {
          best_abs = std::abs(T_(i, j));
          best = j;
        }
      }
      if (best >= 0) {
        T_(i, width_ - 1) = 0.0;
        pivot(i, best);
      }
    }
  }

 private:
  int choose_entering(bool bland, double tol) const {
    int enter = -1;
    double best = -tol;
    for (int j = 0; j < structural_; ++j) {
      const double d = T_(rows_, j);
      if (bland) {
        if (d < -tol) return j;
      } else if (d < best) {
        best = d;
        enter = j;
      }
    }
    return enter;
  }

  int choose_leaving(int enter, bool bland) const {
    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int i = 0; i < rows_; ++i) {
      const double a = T_(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = std::max(rhs(i), 0.0) / a;
      if (leave < 0 || ratio < best_ratio - 1e-12 * (1.0 + best_ratio)) {
        leave = i;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + 1e-12 * (1.0 + best_ratio)) {
        const bool better = bland ? basis_[i] < basis_[leave]
                                  : a > T_(leave, enter);
        if (better) {
          leave = i;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    return leave;
  }

  void row_axpy(int target, double alpha, int source) {
    simd::kernels().axpy(width_, alpha, T_.data() + source * width_,
                         T_.data() + target * width_);
  }

  void pivot(int r, int c) {
    const double inv = 1.0 / T_(r, c);
    T_.row(r) *= inv;
    T_(r, c) = 1.0;
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double factor = T_(i, c);
      if (factor == 0.0) continue;
      row_axpy(i, -factor, r);
      T_(i, c) = 0.0;
    }
    basis_[r] = c;
  }

  int rows_;
  int structural_;
  int width_;
  RowMajor T_;
  std::vector<double> sign_;
  std::vector<int> basis_;
};

}  // namespace

SimplexResult solve_standard_form(const Eigen::MatrixXd& E,
                                  const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& c) {
  if (E.rows() != f.size() || E.cols() != c.size()) {
    throw StructuralError("standard-form LP dimensions are inconsistent");
  }
  const int rows = static_cast<int>(E.rows());
  const int cols = static_cast<int>(E.cols());
  const int max_iterations = 1000 + 50 * (rows + cols);

  SimplexResult result;
  Tableau tab(E, f);
  tab.set_phase1_objective();
  tab.optimize(result.iterations, max_iterations);
  const double f_scale = std::max(1.0, f.cwiseAbs().maxCoeff());
  if (tab.objective() > 1e-9 * f_scale) {
    result.status = LpStatus::kInfeasible;
    return result;
  }
  tab.drive_out_artificials();
  tab.set_phase2_objective(c);
  if (!tab.optimize(result.iterations, max_iterations)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  result.status = LpStatus::kOptimal;
  result.y = Eigen::VectorXd::Zero(cols);
  Eigen::MatrixXd B(rows, rows);
  Eigen::VectorXd cB(rows);
  for (int i = 0; i < rows; ++i) {
    const int var = tab.basis()[i];
    if (var < cols) {
      result.y(var) = std::max(tab.rhs(i), 0.0);
      B.col(i) = E.col(var);
      cB(i) = c(var);
    } else {
      // Artificial left in a redundant row; its column is the flipped unit.
      B.col(i).setZero();
      B(var - cols, i) = tab.sign(var - cols);
      cB(i) = 0.0;
    }
  }
  result.objective = c.dot(result.y);
  if (rows > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B.transpose());
    result.duals = lu.solve(cB);
    if (!result.duals.allFinite()) {
      throw NumericalError("singular simplex basis while recovering duals");
    }
  } else {
    result.duals.resize(0);
  }
  return result;
}

}  // namespace internal

namespace {

// Rows scaled to unit Euclidean norm. Rows that are numerically zero, or
// whose normalized offset puts them beyond kFarAway, cannot bind inside the
// search box: they are dropped if satisfied there and make P empty if not.
// Returns false when P is empty for this reason.
constexpr double kZeroRow = 1e-9;
constexpr double kFarAway = 1e9;

bool normalized_rows(const Polytope& P, Eigen::MatrixXd& A, Eigen::VectorXd& b) {
  const int n = P.dim();
  std::vector<int> keep;
  for (int i = 0; i < P.rows(); ++i) {
    const double norm = P.A().row(i).norm();
    const double bi = P.b()(i);
    if (norm <= kZeroRow || std::abs(bi) > kFarAway * norm) {
      if (bi < -kLpTolerance) return false;
      continue;
    }
    keep.push_back(i);
  }
  A.resize(static_cast<Eigen::Index>(keep.size()), n);
  b.resize(static_cast<Eigen::Index>(keep.size()));
  for (size_t r = 0; r < keep.size(); ++r) {
    const double norm = P.A().row(keep[r]).norm();
    A.row(r) = P.A().row(keep[r]) / norm;
    b(r) = P.b()(keep[r]) / norm;
  }
  return true;
}

}  // namespace

std::optional<ChebyshevBall> chebyshev_center(const Polytope& P) {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  if (!normalized_rows(P, A, b)) return std::nullopt;
  const int n = P.dim();
  const int k = static_cast<int>(A.rows());
  if (n == 0) {
    if (k == 0 || b.minCoeff() >= -kLpTolerance) {
      return ChebyshevBall{Eigen::VectorXd(0),
                           std::numeric_limits<double>::infinity()};
    }
    return std::nullopt;
  }
  const double reach =
      std::min(1e4 * std::max(1.0, k > 0 ? b.cwiseAbs().maxCoeff() : 1.0), 1e8);

  // Dual of max t s.t. A z + t <= b, |z_i| <= reach:
  //   min b^T y  s.t.  A^T y = 0, 1^T y = 1, y >= 0.
  const int cols = k + 2 * n;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n + 1, cols);
  Eigen::VectorXd cost(cols);
  E.topLeftCorner(n, k) = A.transpose();
  cost.head(k) = b;
  for (int i = 0; i < n; ++i) {
    E(i, k + 2 * i) = 1.0;
    E(i, k + 2 * i + 1) = -1.0;
    cost(k + 2 * i) = reach;
    cost(k + 2 * i + 1) = reach;
  }
  E.row(n).setOnes();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
  f(n) = 1.0;

  const auto result = internal::solve_standard_form(E, f, cost);
  if (result.status != LpStatus::kOptimal) {
    throw InternalInconsistencyError("max-margin dual is always solvable");
  }
  const double radius = result.duals(n);
  if (radius < -1e-9) return std::nullopt;
  // Report the margin actually achieved at the recovered center, which can
  // fall short of the LP value by the optimality tolerance.
  Eigen::VectorXd center = result.duals.head(n);
  const double achieved = k > 0 ? (b - A * center).minCoeff() : radius;
  return ChebyshevBall{std::move(center), std::max(std::min(radius, achieved), 0.0)};
}

std::optional<Eigen::VectorXd> feasible(const Polytope& P) {
  auto ball = chebyshev_center(P);
  if (!ball) return std::nullopt;
  return std::move(ball->center);
}

LpResult maximize(const Polytope& P, const Eigen::VectorXd& c) {
  if (c.size() != P.dim()) {
    throw StructuralError("objective dimension does not match polytope");
  }
  LpResult out;
  const auto witness = feasible(P);
  if (!witness) {
    out.status = LpStatus::kInfeasible;
    return out;
  }
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  normalized_rows(P, A, b);
  if (c.isZero(0.0)) {
    out.status = LpStatus::kOptimal;
    out.value = 0.0;
    out.argmax = *witness;
    return out;
  }
  // Dual: min b^T y s.t. A^T y = c, y >= 0. Dual infeasibility means the
  // (feasible) primal is unbounded.
  const auto result = internal::solve_standard_form(A.transpose(), c, b);
  if (result.status != LpStatus::kOptimal) {
    out.status = LpStatus::kUnbounded;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  out.status = LpStatus::kOptimal;
  out.argmax = result.duals;
  out.value = c.dot(out.argmax);
  return out;
}

std::optional<Box> bounding_box(const Polytope& P) {
  const int n = P.dim();
  Box box{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Unit(n, i);
    const LpResult hi = maximize(P, e);
    if (hi.status == LpStatus::kInfeasible) return std::nullopt;
    const LpResult lo = maximize(P, -e);
    if (lo.status == LpStatus::kInfeasible) return std::nullopt;
    box.upper(i) = hi.status == LpStatus::kOptimal
                       ? hi.value
                       : std::numeric_limits<double>::infinity();
    box.lower(i) = lo.status == LpStatus::kOptimal
                       ? -lo.value
                       : -std::numeric_limits<double>::infinity();
  }
  return box;
}

Polytope drop_rows_implied_by_box(const Polytope& P, const Box& box) {
  std::vector<int> keep;
  for (int i = 0; i < P.rows(); ++i) {
    double worst = 0.0;
    for (int j = 0; j < P.dim(); ++j) {
      const double a = P.A()(i, j);
      if (a == 0.0) continue;
      // Inflate slightly: the box itself carries LP round-off.
      const double slack = 1e-9 * (1.0 + std::abs(box.upper(j)) +
                                   std::abs(box.lower(j)));
      worst += a > 0 ? a * (box.upper(j) + slack) : a * (box.lower(j) - slack);
    }
    if (!(worst < P.b()(i))) keep.push_back(i);
  }
  Eigen::MatrixXd A(static_cast<Eigen::Index>(keep.size()), P.dim());
  Eigen::VectorXd b(static_cast<Eigen::Index>(keep.size()));
  for (size_t r = 0; r < keep.size(); ++r) {
    A.row(r) = P.A().row(keep[r]);
    b(r) = P.b()(keep[r]);
  }
  return Polytope(std::move(A), std::move(b));
}

}  // namespace bezreach
