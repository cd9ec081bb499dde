#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "bezreach/constraints.h"
#include "bezreach/models.h"
#include "bezreach/planner.h"
#include "bezreach/reachability.h"
#include "bezreach/sim.h"

namespace bezreach {

struct ModelConfig {
  std::string kind = "pendulum";  // pendulum | integrator
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double ripple = 0.0;
  int gamma = 2;  // integrator only
  int m = 1;      // integrator only
};

struct TrackerConfig {
  double natural_frequency = 1.0;
  std::optional<Eigen::VectorXd> gains;  // overrides natural_frequency
};

struct CertificateConfig {
  double e0 = 0.0;
  double lipschitz_e = 0.0;
  double lipschitz_pi = 1.0;
  double lipschitz_psi = 1.0;
  std::optional<double> lipschitz_k;  // default: from the tracker gains
  double k_reference = 0.0;           // constant ||k(Psi(x), x, 0)||
};

struct ConstraintsConfig {
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
  double u_max = 1.0;
  Eigen::VectorXd W;
};

struct CurveConfig {
  int order = 5;
  double duration = 1.0;
  int segments = 1;
  ReferencePolicy policy = ReferencePolicy::kConstant;
  std::vector<Eigen::VectorXd> fixed_references;
  BoundarySolver solver = BoundarySolver::kMinEnergy;
};

struct PlannerConfig {
  std::optional<Box> bounds;  // default: bounding box of C_X
  int vertices = 200;
  std::uint64_t seed = 1;
  std::optional<Eigen::VectorXd> start;
  std::optional<Eigen::VectorXd> goal;
  EdgeMode mode = EdgeMode::kIntersection;
};

struct ReachConfig {
  std::optional<Eigen::VectorXd> anchor;
  bool forward = true;
  int samples = 2000;
  int thin = 10;
  std::vector<double> u_max_sweep;
  long volume_draws = 20000;
};

struct SimConfig {
  double dt = 0.0;  // 0: segment duration / 500
  DisturbancePolicy policy = DisturbancePolicy::kWorstCaseSign;
  double inflation = 1.0;
  int seeds = 10;
  std::string trajectory;  // trajectory JSON to roll out instead of planning
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats = {"csv", "json", "svg"};
  double sample_rate = 100.0;
  bool timing = false;

  bool wants(const std::string& format) const;
};

struct RunConfig {
  ModelConfig model;
  TrackerConfig tracker;
  CertificateConfig certificate;
  ConstraintsConfig constraints;
  CurveConfig curve;
  PlannerConfig planner;
  ReachConfig reach;
  SimConfig sim;
  OutputConfig output;
  std::filesystem::path base_directory;  // relative paths resolve here
};

// Throws ConfigError with the offending field path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

// The fully resolved configuration, defaults included.
nlohmann::json config_to_json(const RunConfig& config);

PlanningModel make_model(const RunConfig& config);
PdTracker make_tracker(const RunConfig& config);
TrackingCertificate make_certificate(const RunConfig& config);
ConstraintSet make_constraints(const RunConfig& config, double u_max);
CertificateSynthesizer make_synthesizer(const RunConfig& config, double u_max,
                                        int segments);
ReachSpec make_spec(const RunConfig& config, double u_max, int segments);

std::string policy_name(ReferencePolicy policy);
std::string disturbance_name(DisturbancePolicy policy);

}  // namespace bezreach
