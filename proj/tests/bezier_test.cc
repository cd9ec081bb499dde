#include "bezreach/bezier.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "bezreach/errors.h"

namespace bezreach {
namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) M(i, j) = u(rng);
  }
  return M;
}

double binomial(int n, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

TEST(BernsteinBasisTest, StartOfInterval) {
  const Eigen::VectorXd z = bernstein_basis(2, 1.0, 0.0);
  EXPECT_EQ(z, Eigen::Vector3d(1.0, 0.0, 0.0));
}

TEST(BernsteinBasisTest, Midpoint) {
  const Eigen::VectorXd z = bernstein_basis(2, 1.0, 0.5);
  EXPECT_NEAR(z(0), 0.25, 1e-15);
  EXPECT_NEAR(z(1), 0.5, 1e-15);
  EXPECT_NEAR(z(2), 0.25, 1e-15);
}

TEST(BernsteinBasisTest, MatchesBinomialFormula) {
  for (int p = 1; p <= 12; ++p) {
    for (double t : {0.0, 0.3, 1.1, 1.7, 2.0}) {
      const Eigen::VectorXd z = bernstein_basis(p, 2.0, t);
      const double s = t / 2.0;
      for (int k = 0; k <= p; ++k) {
        const double expected =
            binomial(p, k) * std::pow(s, k) * std::pow(1 - s, p - k);
        EXPECT_NEAR(z(k), expected, 1e-14);
      }
    }
  }
}

TEST(BernsteinBasisTest, PartitionOfUnity) {
  const Eigen::VectorXd z = bernstein_basis(3, 2.0, 1.3);
  EXPECT_NEAR(z.sum(), 1.0, 1e-12);
  EXPECT_GE(z.minCoeff(), 0.0);
}

TEST(BernsteinBasisTest, RejectsOutOfRange) {
  EXPECT_THROW(bernstein_basis(3, 1.0, -0.1), DomainError);
  EXPECT_THROW(bernstein_basis(3, 1.0, 1.5), DomainError);
  EXPECT_THROW(bernstein_basis(3, 0.0, 0.0), DomainError);
  EXPECT_THROW(bernstein_basis(kMaxOrder + 1, 1.0, 0.0), DomainError);
}

TEST(BezierCurveTest, ConstantCurve) {
  const Eigen::Vector2d c(0.7, -1.2);
  const BezierCurve curve(c.replicate(1, 5), 3.0);
  for (double t : {0.0, 0.4, 1.9, 3.0}) {
    EXPECT_LT((curve.eval(t) - c).norm(), 1e-14);
  }
}

TEST(BezierCurveTest, LinearInterpolation) {
  const BezierCurve curve(Eigen::RowVector2d(0.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(curve.eval(0.25)(0), 0.25);
}

TEST(BezierCurveTest, EndpointInterpolation) {
  std::mt19937_64 rng(3);
  const BezierCurve curve(random_matrix(rng, 3, 6), 1.7);
  EXPECT_LT((curve.eval(0.0) - curve.points().col(0)).norm(), 1e-15);
  EXPECT_LT((curve.eval(1.7) - curve.points().col(5)).norm(), 1e-15);
}

TEST(BezierCurveTest, EvalManyAgreesWithEval) {
  std::mt19937_64 rng(5);
  const BezierCurve curve(random_matrix(rng, 2, 8), 2.5);
  const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(37, 0.0, 2.5);
  const Eigen::MatrixXd many = curve.eval_many(times);
  for (int i = 0; i < times.size(); ++i) {
    EXPECT_LT((many.col(i) - curve.eval(times(i))).norm(), 1e-13);
  }
}

TEST(DiffMatrixTest, TwoBandPattern) {
  const Eigen::MatrixXd S = diff_matrix(2, 2.0);
  ASSERT_EQ(S.rows(), 3);
  ASSERT_EQ(S.cols(), 2);
  Eigen::MatrixXd expected(3, 2);
  expected << -1, 0, 1, -1, 0, 1;
  EXPECT_EQ(S, expected);
}

TEST(DiffMatrixTest, ConstantHasZeroDerivative) {
  const Eigen::MatrixXd points = Eigen::MatrixXd::Constant(2, 4, 3.5);
  EXPECT_LT((points * diff_matrix(3, 1.3)).norm(), 1e-14);
}

TEST(DiffMatrixTest, MatchesFiniteDifference) {
  std::mt19937_64 rng(7);
  const double T = 1.4;
  const BezierCurve curve(random_matrix(rng, 2, 4), T);
  const Eigen::MatrixXd dpts = curve.points() * diff_matrix(3, T);
  const double h = 1e-5;
  for (double t : {0.2, 0.7, 1.1}) {
    const Eigen::VectorXd fd = (curve.eval(t + h) - curve.eval(t - h)) / (2 * h);
    const Eigen::VectorXd exact = dpts * bernstein_basis(2, T, t);
    EXPECT_LT((fd - exact).norm(), 1e-8);
  }
}

TEST(ElevationTest, LinearToQuadratic) {
  const Eigen::RowVectorXd elevated =
      Eigen::RowVector2d(0.0, 1.0) * elevation_matrix(2);
  EXPECT_EQ(elevated, Eigen::RowVector3d(0.0, 0.5, 1.0));
}

TEST(ElevationTest, IteratedElevationPreservesCurve) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd pts = random_matrix(rng, 2, 3);
  Eigen::MatrixXd up = pts;
  for (int p = 3; p <= 5; ++p) up = up * elevation_matrix(p);
  const BezierCurve a(pts, 1.0);
  const BezierCurve b(up, 1.0);
  for (int i = 0; i <= 200; ++i) {
    const double t = i / 200.0;
    EXPECT_LT((a.eval(t) - b.eval(t)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(DerivativeMapTest, VanishesOnLowDegreePolynomials) {
  // A degree-1 polynomial written at order 4: second derivative is zero.
  const Eigen::MatrixXd line = Eigen::RowVector2d(-0.3, 2.0) *
                               elevation_matrix(2) * elevation_matrix(3) *
                               elevation_matrix(4);
  const Eigen::MatrixXd H = derivative_map(4, 0.8);
  EXPECT_LT((line * H * H).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DerivativeMapTest, MatchesFiniteDifference) {
  std::mt19937_64 rng(13);
  const double T = 2.0;
  for (int trial = 0; trial < 20; ++trial) {
    const BezierCurve curve(random_matrix(rng, 2, 6), T);
    const BezierCurve d = curve.derivative();
    for (double h : {1e-3, 1e-4}) {
      const double t = 0.3 + 1.3 * trial / 20.0;
      const Eigen::VectorXd fd =
          (curve.eval(t + h) - curve.eval(t - h)) / (2 * h);
      EXPECT_LT((d.eval(t) - fd).norm(), 50.0 * h * h);
    }
  }
}

TEST(SplitTest, SingleSegmentIsIdentity) {
  const auto Q = split_matrices(5, 1);
  ASSERT_EQ(Q.size(), 1u);
  EXPECT_EQ(Q[0], Eigen::MatrixXd::Identity(6, 6));
}

TEST(SplitTest, LinearMidpoint) {
  const auto Q = split_matrices(1, 2);
  const Eigen::RowVector2d pts(0.0, 1.0);
  EXPECT_EQ(Eigen::RowVectorXd(pts * Q[0]), Eigen::RowVector2d(0.0, 0.5));
  EXPECT_EQ(Eigen::RowVectorXd(pts * Q[1]), Eigen::RowVector2d(0.5, 1.0));
}

TEST(SplitTest, StitchedSegmentsMatchOriginal) {
  std::mt19937_64 rng(17);
  const int p = 4;
  const int k = 3;
  const double T = 1.5;
  const BezierCurve curve(random_matrix(rng, 2, p + 1), T);
  const auto Q = split_matrices(p, k);
  for (int i = 0; i < k; ++i) {
    const BezierCurve seg(curve.points() * Q[i], T);
    for (int s = 0; s <= 100; ++s) {
      const double t = T * s / 100.0;
      const double original_t = (i + t / T) * T / k;
      EXPECT_LT((seg.eval(t) - curve.eval(original_t)).cwiseAbs().maxCoeff(),
                1e-9);
    }
  }
}

TEST(SplitTest, RejectsZeroSegments) {
  EXPECT_THROW(split_matrices(3, 0), DomainError);
}

TEST(StateCurveTest, BlocksAreDerivatives) {
  std::mt19937_64 rng(19);
  const double T = 1.2;
  const Eigen::MatrixXd pts = random_matrix(rng, 2, 6);
  const Eigen::MatrixXd P = state_curve_matrix(pts, 3, T);
  ASSERT_EQ(P.rows(), 6);
  const Eigen::MatrixXd H = derivative_map(5, T);
  EXPECT_LT((P.middleRows(4, 2) - pts * H * H).norm(), 1e-12);
  const BezierCurve state(P, T);
  const double h = 1e-5;
  const double t = 0.45;
  const Eigen::VectorXd fd = (state.eval(t + h) - state.eval(t - h)) / (2 * h);
  EXPECT_LT((fd.head(4) - state.eval(t).tail(4)).norm(), 1e-7);
}

TEST(BoundaryTest, FirstOrderEndpoints) {
  const Eigen::MatrixXd D = boundary_matrix(1, 1, 1.0);
  const Eigen::MatrixXd pts =
      solve_boundary(D, Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(-3.0, 4.0));
  Eigen::MatrixXd expected(2, 2);
  expected << 1, -3, 2, 4;
  EXPECT_LT((pts - expected).norm(), 1e-14);
}

TEST(BoundaryTest, CubicHermite) {
  const double q0 = 0.3, v0 = -1.1, qT = 2.0, vT = 0.4;
  const double T = 1.0;
  const Eigen::MatrixXd D = boundary_matrix(3, 2, T);
  const Eigen::MatrixXd pts = solve_boundary(D, Eigen::Vector2d(q0, v0),
                                             Eigen::Vector2d(qT, vT));
  const Eigen::RowVector4d hermite(q0, q0 + v0 * T / 3, qT - vT * T / 3, qT);
  EXPECT_LT((pts - hermite).norm(), 1e-12);
}

TEST(BoundaryTest, OverdeterminedOrderMeetsBoundary) {
  std::mt19937_64 rng(23);
  const double T = 0.7;
  const Eigen::MatrixXd D = boundary_matrix(5, 2, T);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x0 = random_matrix(rng, 4, 1);
    const Eigen::VectorXd xT = random_matrix(rng, 4, 1);
    const Eigen::MatrixXd pts = solve_boundary(D, x0, xT);
    const BezierCurve state(state_curve_matrix(pts, 2, T), T);
    EXPECT_LT((state.eval(0.0) - x0).norm(), 1e-9);
    EXPECT_LT((state.eval(T) - xT).norm(), 1e-9);
  }
}

TEST(BoundaryTest, RegularizedSolutionMeetsBoundary) {
  const double T = 1.0;
  const Eigen::MatrixXd D = boundary_matrix(6, 2, T);
  // Penalize second-derivative control points.
  const Eigen::MatrixXd H = derivative_map(6, T);
  const Eigen::MatrixXd cost = Eigen::MatrixXd::Identity(7, 7) +
                               0.01 * H * H * (H * H).transpose();
  const Eigen::Vector2d x0(0.0, 1.0);
  const Eigen::Vector2d xT(1.0, 0.0);
  const Eigen::MatrixXd pts = solve_boundary(D, x0, xT, cost);
  EXPECT_LT((pts * D - (Eigen::MatrixXd(1, 4) << 0, 1, 1, 0).finished())
                .norm(),
            1e-9);
  EXPECT_FALSE(pts.isApprox(solve_boundary(D, x0, xT)));
}

TEST(BoundaryTest, EquilibriumGivesConstantCurve) {
  // At p = 2*gamma - 1 the boundary data fix the curve uniquely.
  const Eigen::MatrixXd D = boundary_matrix(3, 2, 2.0);
  const Eigen::Vector4d rest(0.5, -0.25, 0.0, 0.0);
  const Eigen::MatrixXd pts = solve_boundary(D, rest, rest);
  for (int j = 0; j < pts.cols(); ++j) {
    EXPECT_LT((pts.col(j) - rest.head(2)).norm(), 1e-12);
  }
}

TEST(BoundaryTest, MinEnergyInverseIsRightInverse) {
  for (int gamma = 1; gamma <= 3; ++gamma) {
    for (int p = 2 * gamma - 1; p <= 9; ++p) {
      const Eigen::MatrixXd D = boundary_matrix(p, gamma, 1.3);
      const Eigen::MatrixXd R = min_energy_boundary_inverse(p, gamma, 1.3);
      EXPECT_LT((R * D - Eigen::MatrixXd::Identity(2 * gamma, 2 * gamma)).norm(),
                1e-9)
          << "p=" << p << " gamma=" << gamma;
      if (p == 2 * gamma - 1) {
        EXPECT_LT((R - D.inverse()).norm(), 1e-9);
      }
    }
  }
}

TEST(BoundaryTest, MinEnergyInverseKeepsRestPoints) {
  const Eigen::MatrixXd R = min_energy_boundary_inverse(7, 2, 1.0);
  const Eigen::RowVector4d rest(2.0, 0.0, 2.0, 0.0);
  const Eigen::RowVectorXd pts = rest * R;
  EXPECT_LT((pts.array() - 2.0).abs().maxCoeff(), 1e-12);
  // The minimum-norm inverse pulls interior points toward the origin.
  const Eigen::RowVectorXd min_norm = rest * boundary_inverse(boundary_matrix(7, 2, 1.0));
  EXPECT_GT((min_norm.array() - 2.0).abs().maxCoeff(), 0.1);
}

TEST(BoundaryTest, MinEnergyInverseMinimizesAcceleration) {
  std::mt19937_64 rng(31);
  const int p = 6;
  const double T = 1.5;
  const Eigen::MatrixXd D = boundary_matrix(p, 2, T);
  const Eigen::MatrixXd R = min_energy_boundary_inverse(p, 2, T);
  const Eigen::MatrixXd H2 = derivative_map(p, T) * derivative_map(p, T);
  // Directions that leave the boundary data unchanged.
  const Eigen::MatrixXd null = D.transpose().fullPivLu().kernel();
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::RowVectorXd x = random_matrix(rng, 1, 4);
    const Eigen::RowVectorXd best = x * R;
    const Eigen::RowVectorXd other =
        best + (null * random_matrix(rng, null.cols(), 1)).transpose();
    EXPECT_LT((other * D - x).norm(), 1e-9);
    EXPECT_LE((best * H2).squaredNorm(), (other * H2).squaredNorm() + 1e-12);
  }
}

TEST(BoundaryTest, Deterministic) {
  const Eigen::MatrixXd D = boundary_matrix(7, 2, 1.3);
  const Eigen::Vector2d x0(0.1, 0.2), xT(-0.4, 0.9);
  EXPECT_EQ(solve_boundary(D, x0, xT), solve_boundary(D, x0, xT));
}

TEST(BoundaryTest, InsufficientOrder) {
  EXPECT_THROW(boundary_matrix(2, 2, 1.0), InsufficientOrderError);
  const Eigen::MatrixXd wide = Eigen::MatrixXd::Ones(3, 4);
  EXPECT_THROW(boundary_inverse(wide), InsufficientOrderError);
}

TEST(BoundaryTest, FullColumnRank) {
  for (int gamma = 1; gamma <= 3; ++gamma) {
    for (int p = 2 * gamma - 1; p <= 9; ++p) {
      const Eigen::MatrixXd D = boundary_matrix(p, gamma, 1.1);
      Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
      EXPECT_EQ(lu.rank(), 2 * gamma);
    }
  }
}

TEST(VectorizationTest, CommutationIdentity) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const int rows = 1 + trial % 4;
    const int cols = 1 + trial % 7;
    const Eigen::MatrixXd A = random_matrix(rng, rows, cols);
    const Eigen::MatrixXd At = A.transpose();
    const Eigen::VectorXd vecA = A.reshaped();
    const Eigen::VectorXd vecAt = At.reshaped();
    EXPECT_LT((commutation_matrix(rows, cols) * vecAt - vecA).norm(), 1e-15);
  }
}

TEST(VectorizationTest, ScalarOutputStacksPowers) {
  const int p = 4, gamma = 2;
  const double T = 1.5;
  const auto maps = vectorization_maps(p, gamma, 1, T);
  const Eigen::MatrixXd H = derivative_map(p, T);
  // With m = 1, vec(P) interleaves rows q_j, q'_j per control point j.
  for (int j = 0; j <= p; ++j) {
    for (int l = 0; l <= p; ++l) {
      EXPECT_EQ(maps.H_vec(2 * j, l), l == j ? 1.0 : 0.0);
      EXPECT_EQ(maps.H_vec(2 * j + 1, l), H(l, j));
    }
  }
  EXPECT_EQ(maps.K_comm.rows(), gamma * (p + 1));
}

TEST(VectorizationTest, RandomIdentities) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + trial % 3;
    const int gamma = 1 + trial % 3;
    const int p = 2 * gamma - 1 + trial % 4;
    const double T = 0.5 + 0.1 * (trial % 10);
    const auto maps = vectorization_maps(p, gamma, m, T);
    const Eigen::MatrixXd pts = random_matrix(rng, m, p + 1);
    const Eigen::VectorXd vp = pts.reshaped();

    const Eigen::MatrixXd P = state_curve_matrix(pts, gamma, T);
    const Eigen::VectorXd vP = P.reshaped();
    EXPECT_LT((maps.H_vec * vp - vP).cwiseAbs().maxCoeff(), 1e-10);

    // Kronecker construction through the commutation matrix.
    const int n = gamma * m;
    const Eigen::MatrixXd H = derivative_map(p, T);
    Eigen::MatrixXd stacked(gamma * m * (p + 1), m * (p + 1));
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(p + 1, p + 1);
    const Eigen::MatrixXd Im = Eigen::MatrixXd::Identity(m, m);
    for (int k = 0; k < gamma; ++k) {
      stacked.middleRows(k * m * (p + 1), m * (p + 1)) =
          Eigen::kroneckerProduct(power.transpose(), Im);
      power = power * H;
    }
    const Eigen::MatrixXd via_k =
        Eigen::kroneckerProduct(maps.K_comm, Im) * stacked;
    EXPECT_LT((via_k - maps.H_vec).cwiseAbs().maxCoeff(), 1e-10);

    // D_vec against endpoint evaluation and against Delta_vec * H_vec.
    const BezierCurve state(P, T);
    Eigen::VectorXd ends(2 * n);
    ends << state.eval(0.0), state.eval(T);
    EXPECT_LT((maps.D_vec * vp - ends).cwiseAbs().maxCoeff(), 1e-10);
    Eigen::MatrixXd Delta = Eigen::MatrixXd::Zero(p + 1, 2);
    Delta(0, 0) = 1.0;
    Delta(p, 1) = 1.0;
    const Eigen::MatrixXd Delta_vec = Eigen::kroneckerProduct(
        Delta.transpose(), Eigen::MatrixXd::Identity(n, n));
    EXPECT_LT((Delta_vec * maps.H_vec - maps.D_vec).cwiseAbs().maxCoeff(),
              1e-10);

    const Eigen::MatrixXd A = random_matrix(rng, gamma, p + 1);
    const Eigen::MatrixXd At = A.transpose();
    EXPECT_LT((maps.K_comm * At.reshaped() - A.reshaped()).norm(), 1e-10);
  }
}

}  // namespace
}  // namespace bezreach
