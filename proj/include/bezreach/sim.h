#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "bezreach/models.h"
#include "bezreach/planner.h"

namespace bezreach {

// How the tracking error inside the certified tube is chosen at each step.
enum class DisturbancePolicy {
  kZero,
  kWorstCaseSign,  // the tube corner with the smallest constraint margin
  kRandom,         // a seeded random tube corner
};

struct DisturbanceSpec {
  DisturbancePolicy policy = DisturbancePolicy::kZero;
  // Scales the tube radius e(u_d); above 1 the error leaves the certified tube.
  double inflation = 1.0;
  std::uint64_t seed = 0;
};

struct RolloutOptions {
  double dt = 0.0;  // 0 means segment duration / 500
  DisturbanceSpec disturbance;
  // Initial state of the nominal loop; defaults to the reference at t = 0.
  std::optional<Eigen::VectorXd> initial_state;
};

struct MarginReport {
  Eigen::VectorXd state_margin;  // min over rows of d - C x, per step
  Eigen::VectorXd input_margin;  // u_max - ||W u||_inf, per step
  double min_state_margin = std::numeric_limits<double>::infinity();
  double min_input_margin = std::numeric_limits<double>::infinity();
  bool pass = true;
};

inline constexpr double kMarginTolerance = 1e-6;

struct RolloutResult {
  Eigen::VectorXd time;
  Eigen::MatrixXd states;     // n x steps, closed-loop state including the error
  Eigen::MatrixXd nominal;    // n x steps, integrated loop without the error
  Eigen::MatrixXd reference;  // n x steps, x_d
  Eigen::MatrixXd inputs;     // m x steps, applied input
  Eigen::MatrixXd feedforward;  // m x steps, u_d
  MarginReport margins;
  bool violation = false;

  int steps() const { return static_cast<int>(time.size()); }
};

// Margins of every stored step against C_X and the input bound. An empty
// result passes vacuously.
MarginReport monitor(const RolloutResult& result, const ConstraintSet& cs);

// Fixed-step RK4 of the planning model under u = k(x, x_d, u_d), with
// u_d the flat input of the trajectory. The reported closed-loop state is
// the nominal state plus an error of infinity norm inflation * e(||u_d||),
// and the applied input is the tracker evaluated there. Throws
// DivergenceError when the nominal state leaves ten times the C_X box.
RolloutResult rollout(const PlanningModel& model,
                      const PlannedTrajectory& trajectory,
                      const PdTracker& tracker,
                      const TrackingCertificate& certificate,
                      const ConstraintSet& cs, const RolloutOptions& options);

}  // namespace bezreach
