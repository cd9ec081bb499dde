#include "bezreach/sim.h"

#include <cmath>
#include <random>
#include <string>

#include "bezreach/errors.h"

namespace bezreach {
namespace {

struct ReferencePoint {
  Eigen::VectorXd x_d;
  Eigen::VectorXd u_d;
};

ReferencePoint reference_at(const PlanningModel& model,
                            const PlannedTrajectory& trajectory, double t) {
  const Eigen::MatrixXd d = trajectory.derivatives(t);
  ReferencePoint out;
  out.x_d = d.leftCols(model.gamma()).reshaped();
  out.u_d = flat_input(model, out.x_d, d.col(model.gamma()));
  return out;
}

double state_margin(const ConstraintSet& cs, const Eigen::VectorXd& x) {
  return (cs.d - cs.C * x).minCoeff();
}

}  // namespace

MarginReport monitor(const RolloutResult& result, const ConstraintSet& cs) {
  MarginReport report;
  const int steps = result.steps();
  report.state_margin.resize(steps);
  report.input_margin.resize(steps);
  for (int s = 0; s < steps; ++s) {
    report.state_margin(s) = state_margin(cs, result.states.col(s));
    report.input_margin(s) = cs.u_max - cs.input_norm(result.inputs.col(s));
  }
  if (steps > 0) {
    report.min_state_margin = report.state_margin.minCoeff();
    report.min_input_margin = report.input_margin.minCoeff();
  }
  report.pass = !(report.min_state_margin < -kMarginTolerance) &&
                !(report.min_input_margin < -kMarginTolerance);
  return report;
}

RolloutResult rollout(const PlanningModel& model,
                      const PlannedTrajectory& trajectory,
                      const PdTracker& tracker,
                      const TrackingCertificate& certificate,
                      const ConstraintSet& cs, const RolloutOptions& options) {
  const int n = model.n();
  const int m = model.m();
  cs.validate(n, m);
  if (tracker.gains.size() != model.gamma()) {
    throw StructuralError("tracker needs one gain per output derivative");
  }
  RolloutResult result;
  if (trajectory.empty()) {
    result.margins = monitor(result, cs);
    return result;
  }
  if (trajectory.gamma() != model.gamma() || trajectory.m() != m) {
    throw StructuralError("trajectory does not match the model");
  }
  const double segment = trajectory.segments().front().duration();
  const double dt = options.dt > 0 ? options.dt : segment / 500;
  if (dt > segment / 200 * (1 + 1e-12)) {
    throw DomainError("rollout step " + std::to_string(dt) +
                      " exceeds segment duration / 200");
  }
  if (!(options.disturbance.inflation >= 0)) {
    throw DomainError("disturbance inflation must be nonnegative");
  }
  if (options.disturbance.policy == DisturbancePolicy::kWorstCaseSign && n > 16) {
    throw DomainError("worst-case corner search supports n <= 16");
  }
  const double total = trajectory.duration();
  const int intervals = std::max(1, static_cast<int>(std::ceil(total / dt - 1e-9)));
  const double h = total / intervals;

  const auto box = bounding_box(cs.state_polytope());
  const Eigen::VectorXd center = 0.5 * (box->lower + box->upper);
  const Eigen::VectorXd reach = 5.0 * (box->upper - box->lower);

  auto closed_loop = [&](const Eigen::VectorXd& x, double t) {
    const ReferencePoint ref = reference_at(model, trajectory, t);
    return model.dynamics(x, tracker.input(x, ref.x_d, ref.u_d, m));
  };

  const int steps = intervals + 1;
  result.time.resize(steps);
  result.states.resize(n, steps);
  result.nominal.resize(n, steps);
  result.reference.resize(n, steps);
  result.inputs.resize(m, steps);
  result.feedforward.resize(m, steps);

  std::mt19937_64 rng(options.disturbance.seed);
  Eigen::VectorXd x = options.initial_state.value_or(
      reference_at(model, trajectory, 0.0).x_d);
  if (x.size() != n) throw StructuralError("initial state has wrong dimension");
  Eigen::VectorXd corner(n);
  for (int s = 0; s < steps; ++s) {
    const double t = s == intervals ? total : s * h;
    if (s > 0) {
      const double t0 = (s - 1) * h;
      const Eigen::VectorXd k1 = closed_loop(x, t0);
      const Eigen::VectorXd k2 = closed_loop(x + 0.5 * h * k1, t0 + 0.5 * h);
      const Eigen::VectorXd k3 = closed_loop(x + 0.5 * h * k2, t0 + 0.5 * h);
      const Eigen::VectorXd k4 = closed_loop(x + h * k3, t);
      x += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    if (!x.allFinite() || ((x - center).cwiseAbs().array() > reach.array()).any()) {
      throw DivergenceError("closed loop left the safety box at t = " +
                            std::to_string(t));
    }
    const ReferencePoint ref = reference_at(model, trajectory, t);
    const double radius = options.disturbance.inflation *
                          certificate.error_bound(ref.u_d.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd error = Eigen::VectorXd::Zero(n);
    switch (options.disturbance.policy) {
      case DisturbancePolicy::kZero:
        break;
      case DisturbancePolicy::kRandom: {
        for (int i = 0; i < n; ++i) error(i) = (rng() >> 63) ? radius : -radius;
        break;
      }
      case DisturbancePolicy::kWorstCaseSign: {
        double worst = std::numeric_limits<double>::infinity();
        for (unsigned bits = 0; bits < (1u << n); ++bits) {
          for (int i = 0; i < n; ++i) corner(i) = (bits >> i) & 1u ? radius : -radius;
          const Eigen::VectorXd xc = x + corner;
          const double margin = std::min(
              state_margin(cs, xc),
              cs.u_max - cs.input_norm(tracker.input(xc, ref.x_d, ref.u_d, m)));
          if (margin < worst) {
            worst = margin;
            error = corner;
          }
        }
        break;
      }
    }
    result.time(s) = t;
    result.nominal.col(s) = x;
    result.states.col(s) = x + error;
    result.reference.col(s) = ref.x_d;
    result.feedforward.col(s) = ref.u_d;
    result.inputs.col(s) = tracker.input(result.states.col(s), ref.x_d, ref.u_d, m);
  }
  result.margins = monitor(result, cs);
  result.violation = !result.margins.pass;
  return result;
}

}  // namespace bezreach
