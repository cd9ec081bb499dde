#include "bezreach/models.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "bezreach/bezier.h"
#include "bezreach/errors.h"

namespace bezreach {
namespace {

using std::numbers::pi;

Box theta_box(double theta, double omega) {
  return Box{Eigen::Vector2d(-theta, -omega), Eigen::Vector2d(theta, omega)};
}

TEST(FlatInputTest, DoubleIntegratorPassesThrough) {
  const PlanningModel model = integrator_chain(2, 1);
  const Eigen::VectorXd u =
      flat_input(model, Eigen::Vector2d(0.3, -0.2), Eigen::VectorXd::Constant(1, 1.7));
  EXPECT_EQ(u(0), 1.7);
}

TEST(FlatInputTest, PendulumAtRestNeedsNoInput) {
  const PlanningModel model = pendulum_model(1.0, 1.0, 9.81);
  const Eigen::VectorXd u =
      flat_input(model, Eigen::Vector2d::Zero(), Eigen::VectorXd::Zero(1));
  EXPECT_EQ(u(0), 0.0);
}

TEST(FlatInputTest, PendulumHorizontalHoldsAgainstGravity) {
  // theta'' = -(g/l) sin(theta) + u / (m l^2), so holding theta = pi/2 needs
  // u = m g l.
  const PlanningModel model = pendulum_model(1.0, 1.0, 9.81);
  const Eigen::VectorXd u =
      flat_input(model, Eigen::Vector2d(pi / 2, 0.0), Eigen::VectorXd::Zero(1));
  EXPECT_NEAR(u(0), 9.81, 1e-12);

  const PlanningModel heavy = pendulum_model(2.0, 0.5, 9.81);
  EXPECT_NEAR(flat_input(heavy, Eigen::Vector2d(pi / 2, 0.0),
                         Eigen::VectorXd::Zero(1))(0),
              2.0 * 9.81 * 0.5, 1e-12);
}

TEST(FlatInputTest, SubstitutionReproducesHighestDerivative) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  const PlanningModel model = pendulum_model(1.3, 0.7, 9.81, 0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d x(unit(rng), unit(rng));
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, unit(rng));
    const Eigen::VectorXd u = flat_input(model, x, q);
    const Eigen::VectorXd back = model.drift(x) + model.actuation(x) * u;
    EXPECT_NEAR(back(0), q(0), 1e-10);
  }
}

TEST(FlatInputTest, SingularActuationReportsCondition) {
  const PlanningModel model(
      "degenerate", 1, 2, [](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(2); },
      [](const Eigen::VectorXd&) {
        Eigen::MatrixXd g(2, 2);
        g << 1.0, 2.0, 2.0, 4.0;
        return g;
      },
      PlanningModel::Lipschitz{});
  try {
    flat_input(model, Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones());
    FAIL() << "expected SingularityError";
  } catch (const SingularityError& e) {
    EXPECT_GT(e.condition_number(), 1e12);
  }
}

TEST(FlatInputTest, WrongDimensionIsStructural) {
  const PlanningModel model = integrator_chain(2, 2);
  EXPECT_THROW(flat_input(model, Eigen::Vector4d::Zero(), Eigen::Vector3d::Zero()),
               StructuralError);
  EXPECT_THROW(model.drift(Eigen::Vector2d::Zero()), StructuralError);
}

TEST(PendulumModelTest, RejectsNonpositiveParameters) {
  EXPECT_THROW(pendulum_model(0.0, 1.0, 9.81), DomainError);
  EXPECT_THROW(pendulum_model(1.0, -1.0, 9.81), DomainError);
  EXPECT_THROW(pendulum_model(1.0, 1.0, 9.81, 1.0), DomainError);
}

TEST(PendulumModelTest, DriftVanishesAtOrigin) {
  const PlanningModel model = pendulum_model(1.0, 1.0, 9.81);
  EXPECT_EQ(model.drift(Eigen::Vector2d(0.0, 4.0))(0), 0.0);
  EXPECT_EQ(model.gamma(), 2);
  EXPECT_EQ(model.n(), 2);
}

TEST(PendulumModelTest, DriftLipschitzMatchesCosineBound) {
  // |d/dtheta (g/l) sin(theta)| = (g/l)|cos(theta)| peaks at theta = 0.
  const PlanningModel model = pendulum_model(1.0, 0.8, 9.81);
  EXPECT_DOUBLE_EQ(model.lipschitz().f, 9.81 / 0.8);
  const LipschitzSample s = sample_lipschitz(model, theta_box(pi, 5.0), 10000, 3);
  EXPECT_LE(s.f_ratio, model.lipschitz().f);
  EXPECT_GT(s.f_ratio, 0.95 * model.lipschitz().f);
}

TEST(PendulumModelTest, ConstantActuationHasZeroInverseLipschitz) {
  const PlanningModel model = pendulum_model(1.0, 1.0, 9.81);
  EXPECT_EQ(model.lipschitz().g_inverse, 0.0);
  const LipschitzSample s = sample_lipschitz(model, theta_box(pi, 5.0), 1000, 4);
  EXPECT_EQ(s.g_inverse_ratio, 0.0);
}

TEST(PendulumModelTest, RippleInverseLipschitzIsSound) {
  for (double ripple : {0.1, 0.3, 0.6}) {
    const PlanningModel model = pendulum_model(1.2, 0.9, 9.81, ripple);
    const LipschitzSample s =
        sample_lipschitz(model, theta_box(2 * pi, 5.0), 10000, 5);
    EXPECT_LE(s.f_ratio, model.lipschitz().f);
    EXPECT_LE(s.g_inverse_ratio, model.lipschitz().g_inverse);
    EXPECT_GT(s.g_inverse_ratio, 0.0);
    // sup |g| over all theta.
    EXPECT_DOUBLE_EQ(model.lipschitz().g_bound, (1 + ripple) / (1.2 * 0.81));
  }
}

TEST(IntegratorChainTest, Shape) {
  const PlanningModel model = integrator_chain(2, 2);
  EXPECT_EQ(model.n(), 4);
  EXPECT_EQ(model.lipschitz().f, 0.0);
  EXPECT_EQ(model.lipschitz().g_inverse, 0.0);
  const Box box{Eigen::Vector4d::Constant(-1), Eigen::Vector4d::Constant(1)};
  const LipschitzSample s = sample_lipschitz(model, box, 10000, 6);
  EXPECT_EQ(s.f_ratio, 0.0);
  EXPECT_EQ(s.g_inverse_ratio, 0.0);
  const Eigen::Vector2d q(0.4, -0.9);
  EXPECT_EQ(flat_input(model, Eigen::Vector4d::Ones(), q), Eigen::VectorXd(q));
}

TEST(IntegratorChainTest, RejectsEmptyChain) {
  EXPECT_THROW(integrator_chain(0, 1), DomainError);
  EXPECT_THROW(integrator_chain(1, 0), DomainError);
}

// The state curve of any output curve, driven by the flat input, solves the
// model dynamics.
TEST(DynamicFeasibilityTest, FlatInputSolvesDynamics) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-1.5, 1.5);
  const std::vector<PlanningModel> models = {
      pendulum_model(1.0, 1.0, 9.81, 0.3), integrator_chain(2, 2),
      integrator_chain(3, 1)};
  for (const PlanningModel& model : models) {
    for (int p = model.gamma(); p <= model.gamma() + 4; ++p) {
      const double T = 1.7;
      Eigen::MatrixXd points(model.m(), p + 1);
      for (Eigen::Index i = 0; i < points.size(); ++i) points(i) = unit(rng);
      const Eigen::MatrixXd X = state_curve_matrix(points, model.gamma(), T);
      const Eigen::MatrixXd H = derivative_map(p, T);
      Eigen::MatrixXd Hg = Eigen::MatrixXd::Identity(p + 1, p + 1);
      for (int k = 0; k < model.gamma(); ++k) Hg = Hg * H;
      const BezierCurve state(X, T);
      const BezierCurve state_dot(X * H, T);
      const BezierCurve top(points * Hg, T);
      for (int s = 0; s <= 200; ++s) {
        const double t = T * s / 200;
        const Eigen::VectorXd x = state.eval(t);
        const Eigen::VectorXd u = flat_input(model, x, top.eval(t));
        const Eigen::VectorXd residual = state_dot.eval(t) - model.dynamics(x, u);
        EXPECT_LE(residual.lpNorm<Eigen::Infinity>(), 1e-8)
            << model.name() << " p=" << p << " t=" << t;
      }
    }
  }
}

TEST(TrackingCertificateTest, ErrorBoundIsAffineAndNondecreasing) {
  TrackingCertificate cert;
  cert.e0 = 0.2;
  cert.lipschitz_e = 0.1;
  EXPECT_DOUBLE_EQ(cert.error_bound(0.0), 0.2);
  double last = cert.error_bound(0.0);
  for (double u = 0.1; u < 10; u += 0.1) {
    EXPECT_GE(cert.error_bound(u), last);
    last = cert.error_bound(u);
  }
  EXPECT_TRUE(cert.admits(0.3));
  EXPECT_FALSE(cert.admits(0.2));
}

TEST(TrackingCertificateTest, RejectsNegativeConstants) {
  TrackingCertificate cert;
  cert.lipschitz_e = -1.0;
  EXPECT_THROW(cert.validate(), DomainError);
  cert.lipschitz_e = std::nan("");
  EXPECT_THROW(cert.validate(), DomainError);
}

TEST(TrackingCertificateTest, OffsetAddsTrackerReference) {
  TrackingCertificate cert;
  cert.e0 = 0.5;
  cert.lipschitz_k = 2.0;
  cert.k_ref_norm = [](const Eigen::VectorXd& x) { return x.lpNorm<Eigen::Infinity>(); };
  EXPECT_DOUBLE_EQ(cert.input_offset(Eigen::Vector2d(0.0, -3.0)), 4.0);
}

TEST(PdTrackerTest, CriticallyDampedGainsAreBinomial) {
  const PdTracker second = PdTracker::critically_damped(2, 0.4);
  EXPECT_NEAR(second.gains(0), 0.16, 1e-15);
  EXPECT_NEAR(second.gains(1), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(second.lipschitz(), 1.0);

  const PdTracker third = PdTracker::critically_damped(3, 2.0);
  EXPECT_DOUBLE_EQ(third.gains(0), 8.0);
  EXPECT_DOUBLE_EQ(third.gains(1), 12.0);
  EXPECT_DOUBLE_EQ(third.gains(2), 6.0);
  EXPECT_DOUBLE_EQ(third.lipschitz(), 26.0);
}

TEST(PdTrackerTest, InputBoundHolds) {
  // ||k(x, x_d, u_d)|| <= L_k (||x - x_d|| + ||u_d||) with k_ref = 0.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-2.0, 2.0);
  const PdTracker tracker = PdTracker::critically_damped(2, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Vector4d x(unit(rng), unit(rng), unit(rng), unit(rng));
    const Eigen::Vector4d xd(unit(rng), unit(rng), unit(rng), unit(rng));
    const Eigen::Vector2d ud(unit(rng), unit(rng));
    const Eigen::VectorXd k = tracker.input(x, xd, ud, 2);
    EXPECT_LE(k.lpNorm<Eigen::Infinity>(),
              tracker.lipschitz() * ((x - xd).lpNorm<Eigen::Infinity>() +
                                     ud.lpNorm<Eigen::Infinity>()) + 1e-12);
  }
}

TEST(ConstraintSetTest, BoxValidates) {
  const ConstraintSet cs =
      ConstraintSet::box(Eigen::Vector2d(-1, -2), Eigen::Vector2d(1, 2), 3.0);
  EXPECT_NO_THROW(cs.validate(2, 1));
  EXPECT_EQ(cs.effective_u_max(), 3.0);
  EXPECT_THROW(cs.validate(3, 1), DomainError);
}

TEST(ConstraintSetTest, UnboundedSetIsRejected) {
  ConstraintSet cs;
  cs.C = Eigen::RowVector2d(1.0, 0.0);
  cs.d = Eigen::VectorXd::Ones(1);
  EXPECT_THROW(cs.validate(2, 1), DomainError);
}

TEST(ConstraintSetTest, EmptySetIsRejected) {
  ConstraintSet cs;
  cs.C.resize(2, 1);
  cs.C << 1.0, -1.0;
  cs.d = Eigen::Vector2d(-1.0, -1.0);
  EXPECT_THROW(cs.validate(1, 1), DomainError);
}

TEST(ConstraintSetTest, WeightsFoldIntoInputBound) {
  ConstraintSet cs =
      ConstraintSet::box(Eigen::Vector2d(-1, -1), Eigen::Vector2d(1, 1), 4.0);
  cs.W = Eigen::Vector2d(2.0, 0.5);
  EXPECT_NO_THROW(cs.validate(2, 2));
  EXPECT_EQ(cs.effective_u_max(), 2.0);
  EXPECT_EQ(cs.input_norm(Eigen::Vector2d(1.0, -6.0)), 3.0);
  // ||u|| <= effective bound implies the weighted bound.
  EXPECT_LE(cs.input_norm(Eigen::Vector2d(2.0, -2.0)), cs.u_max);
  cs.W = Eigen::Vector2d(2.0, 0.0);
  EXPECT_THROW(cs.validate(2, 2), DomainError);
  cs.W = Eigen::Vector2d(1.0, 1.0);
  cs.u_max = 0.0;
  EXPECT_THROW(cs.validate(2, 2), DomainError);
}

}  // namespace
}  // namespace bezreach
