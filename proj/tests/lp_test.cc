#include "bezreach/lp.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "bezreach/errors.h"

namespace bezreach {
namespace {

Polytope unit_box(int n, double lo = 0.0, double hi = 1.0) {
  Eigen::MatrixXd A(2 * n, n);
  A << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(2 * n);
  b << Eigen::VectorXd::Constant(n, hi), Eigen::VectorXd::Constant(n, -lo);
  return Polytope(A, b);
}

// Random 2-D polytope: a few random halfplanes intersected with [-2, 2]^2.
Polytope random_polygon(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> count(1, 6);
  const int k = count(rng);
  Eigen::MatrixXd A(k + 4, 2);
  Eigen::VectorXd b(k + 4);
  for (int i = 0; i < k; ++i) {
    const double angle = 3.14159265358979 * u(rng);
    A.row(i) << std::cos(angle), std::sin(angle);
    b(i) = 1.2 * u(rng);
  }
  A.bottomRows(4) << 1, 0, 0, 1, -1, 0, 0, -1;
  b.tail(4).setConstant(2.0);
  return Polytope(A, b);
}

// -1: grid finds no point even after relaxing every row by `slack`;
// +1: grid finds a point with margin `slack`; 0: too close to call.
int grid_verdict(const Polytope& P, double slack) {
  bool relaxed_hit = false;
  for (int i = 0; i < 400; ++i) {
    for (int j = 0; j < 400; ++j) {
      const Eigen::Vector2d x(-2.0 + 4.0 * (i + 0.5) / 400,
                              -2.0 + 4.0 * (j + 0.5) / 400);
      const double v = P.max_violation(x);
      if (v <= -slack) return 1;
      if (v <= slack) relaxed_hit = true;
    }
  }
  return relaxed_hit ? 0 : -1;
}

TEST(PolytopeTest, RejectsMismatchedShapes) {
  EXPECT_THROW(Polytope(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)),
               StructuralError);
  Eigen::MatrixXd A = Eigen::MatrixXd::Ones(1, 1);
  A(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Polytope(A, Eigen::VectorXd::Ones(1)), NumericalError);
}

TEST(PolytopeTest, EmptyRowSetHasNoViolation) {
  const Polytope all(3);
  EXPECT_EQ(all.max_violation(Eigen::Vector3d(1, 2, 3)),
            -std::numeric_limits<double>::infinity());
}

TEST(FeasibleTest, ContradictoryBounds) {
  Eigen::MatrixXd A(2, 1);
  A << -1, 1;
  const Polytope P(A, Eigen::Vector2d(0.0, -1.0));  // x >= 0, x <= -1
  EXPECT_FALSE(feasible(P).has_value());
}

TEST(FeasibleTest, OverlappingBoxes) {
  const Polytope P = unit_box(2).intersect(unit_box(2, 0.5, 1.5));
  const auto x = feasible(P);
  ASSERT_TRUE(x.has_value());
  EXPECT_TRUE(P.contains(*x));
  EXPECT_GE(x->minCoeff(), 0.5 - 1e-8);
}

TEST(FeasibleTest, TouchingBoxesShareABoundary) {
  const Polytope P = unit_box(2).intersect(unit_box(2, 1.0, 2.0));
  const auto x = feasible(P);
  ASSERT_TRUE(x.has_value());
  EXPECT_NEAR((*x)(0), 1.0, 1e-8);
  EXPECT_NEAR((*x)(1), 1.0, 1e-8);
}

TEST(FeasibleTest, UnboundedHalfspace) {
  Eigen::MatrixXd A(1, 3);
  A << 1, -2, 0.5;
  const Polytope P(A, Eigen::VectorXd::Constant(1, -4.0));
  const auto x = feasible(P);
  ASSERT_TRUE(x.has_value());
  EXPECT_TRUE(P.contains(*x));
}

TEST(FeasibleTest, ZeroRows) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(1, 2);
  EXPECT_TRUE(feasible(Polytope(A, Eigen::VectorXd::Constant(1, 0.0))));
  EXPECT_FALSE(feasible(Polytope(A, Eigen::VectorXd::Constant(1, -1.0))));
}

TEST(FeasibleTest, AgreesWithGridOracle) {
  std::mt19937_64 rng(41);
  int decided = 0;
  int feasible_count = 0;
  for (int attempt = 0; attempt < 500 && decided < 50; ++attempt) {
    const Polytope P = random_polygon(rng);
    const int verdict = grid_verdict(P, 1e-2);
    if (verdict == 0) continue;
    ++decided;
    const auto x = feasible(P);
    EXPECT_EQ(x.has_value(), verdict > 0);
    if (x) {
      ++feasible_count;
      EXPECT_TRUE(P.contains(*x));
    }
  }
  EXPECT_EQ(decided, 50);
  // Both verdicts must be exercised.
  EXPECT_GT(feasible_count, 5);
  EXPECT_LT(feasible_count, 45);
}

TEST(FeasibleTest, Deterministic) {
  std::mt19937_64 rng(43);
  const Polytope P = random_polygon(rng).intersect(unit_box(2, -0.5, 0.5));
  const auto a = feasible(P);
  const auto b = feasible(P);
  ASSERT_EQ(a.has_value(), b.has_value());
  if (a) {
    EXPECT_EQ(*a, *b);
  }
}

TEST(FeasibleTest, HigherDimensionalSimplex) {
  const int n = 12;
  // x >= 0, sum x <= 1, plus many redundant cuts.
  Eigen::MatrixXd A(n + 1 + 30, n);
  Eigen::VectorXd b(n + 1 + 30);
  A.topRows(n) = -Eigen::MatrixXd::Identity(n, n);
  b.head(n).setZero();
  A.row(n).setOnes();
  b(n) = 1.0;
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < n; ++j) A(n + 1 + i, j) = u(rng);
    b(n + 1 + i) = A.row(n + 1 + i).maxCoeff() + 0.1;
  }
  const Polytope P(A, b);
  const auto x = feasible(P);
  ASSERT_TRUE(x.has_value());
  EXPECT_TRUE(P.contains(*x));
  const auto ball = chebyshev_center(P);
  ASSERT_TRUE(ball.has_value());
  // Inscribed ball of the standard simplex: r = 1 / (n + sqrt(n)).
  EXPECT_NEAR(ball->radius, 1.0 / (n + std::sqrt(double(n))), 1e-9);
}

TEST(ChebyshevTest, Square) {
  const auto ball = chebyshev_center(unit_box(2, -1.0, 3.0));
  ASSERT_TRUE(ball.has_value());
  EXPECT_NEAR(ball->radius, 2.0, 1e-12);
  EXPECT_NEAR(ball->center(0), 1.0, 1e-12);
}

TEST(MaximizeTest, UnitBox) {
  const LpResult r = maximize(unit_box(2), Eigen::Vector2d(1.0, 1.0));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  EXPECT_NEAR(r.argmax(0), 1.0, 1e-12);
}

TEST(MaximizeTest, InfeasibleSignal) {
  Eigen::MatrixXd A(2, 1);
  A << -1, 1;
  const LpResult r =
      maximize(Polytope(A, Eigen::Vector2d(0.0, -1.0)), Eigen::VectorXd::Ones(1));
  EXPECT_EQ(r.status, LpStatus::kInfeasible);
}

TEST(MaximizeTest, UnboundedSignal) {
  Eigen::MatrixXd A(1, 2);
  A << 1, 0;
  const LpResult r = maximize(Polytope(A, Eigen::VectorXd::Ones(1)),
                              Eigen::Vector2d(0.0, 1.0));
  EXPECT_EQ(r.status, LpStatus::kUnbounded);
  const LpResult bounded = maximize(Polytope(A, Eigen::VectorXd::Ones(1)),
                                    Eigen::Vector2d(3.0, 0.0));
  ASSERT_EQ(bounded.status, LpStatus::kOptimal);
  EXPECT_NEAR(bounded.value, 3.0, 1e-12);
}

TEST(MaximizeTest, AgreesWithVertexEnumeration) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Polytope P = random_polygon(rng);
    const Eigen::Vector2d c(u(rng), u(rng));
    // Oracle: best feasible pairwise intersection of boundary lines.
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < P.rows(); ++i) {
      for (int j = i + 1; j < P.rows(); ++j) {
        Eigen::Matrix2d M;
        M << P.A().row(i), P.A().row(j);
        if (std::abs(M.determinant()) < 1e-12) continue;
        const Eigen::Vector2d v =
            M.inverse() * Eigen::Vector2d(P.b()(i), P.b()(j));
        if (P.max_violation(v) <= 1e-10) best = std::max(best, c.dot(v));
      }
    }
    const LpResult r = maximize(P, c);
    if (std::isinf(best)) {
      // No vertex: empty (the box rows make every nonempty instance bounded).
      EXPECT_EQ(r.status, LpStatus::kInfeasible);
      continue;
    }
    ASSERT_EQ(r.status, LpStatus::kOptimal);
    EXPECT_NEAR(r.value, best, 1e-8);
    EXPECT_TRUE(P.contains(r.argmax));
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(BoundingBoxTest, BoxAndPruning) {
  Eigen::MatrixXd A(5, 2);
  A << 1, 1, -1, 0, 0, -1, 1, 0, 0.5, 0.5;
  Eigen::VectorXd b(5);
  b << 1, 0, 0, 5, 3;  // last two rows are implied by the first three
  const Polytope P(A, b);
  const auto box = bounding_box(P);
  ASSERT_TRUE(box.has_value());
  EXPECT_NEAR(box->upper(0), 1.0, 1e-10);
  EXPECT_NEAR(box->lower(1), 0.0, 1e-10);
  const Polytope pruned = drop_rows_implied_by_box(P, *box);
  EXPECT_EQ(pruned.rows(), 3);
}

TEST(BoundingBoxTest, EmptyAndUnbounded) {
  Eigen::MatrixXd A(2, 1);
  A << -1, 1;
  EXPECT_FALSE(bounding_box(Polytope(A, Eigen::Vector2d(0.0, -1.0))));
  Eigen::MatrixXd half(1, 1);
  half << 1;
  const auto box = bounding_box(Polytope(half, Eigen::VectorXd::Ones(1)));
  ASSERT_TRUE(box.has_value());
  EXPECT_TRUE(std::isinf(box->lower(0)));
  EXPECT_NEAR(box->upper(0), 1.0, 1e-12);
}

TEST(SimplexTest, DegenerateCyclingExample) {
  // Beale's classic cycling instance in standard form.
  Eigen::MatrixXd E(3, 7);
  E << 0.25, -60, -0.04, 9, 1, 0, 0,   //
      0.5, -90, -0.02, 3, 0, 1, 0,     //
      0, 0, 1, 0, 0, 0, 1;
  const Eigen::Vector3d f(0, 0, 1);
  Eigen::VectorXd c(7);
  c << -0.75, 150, -0.02, 6, 0, 0, 0;
  const auto r = internal::solve_standard_form(E, f, c);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, -0.05, 1e-10);
  EXPECT_LT((E * r.y - f).norm(), 1e-10);
  // Dual feasibility and strong duality.
  EXPECT_LE((E.transpose() * r.duals - c).maxCoeff(), 1e-10);
  EXPECT_NEAR(f.dot(r.duals), r.objective, 1e-10);
}

}  // namespace
}  // namespace bezreach
