#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "bezreach/config.h"
#include "bezreach/errors.h"
#include "bezreach/io.h"
#include "bezreach/planner.h"
#include "bezreach/reachability.h"
#include "bezreach/sim.h"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace bezreach {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitNumerical = 4;

// Planning cannot succeed for this configuration (exit 3).
class PlanningInfeasible : public Error {
 public:
  using Error::Error;
};

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Output directory that records the hash of everything written to it.
class Artifacts {
 public:
  Artifacts(fs::path dir, const RunConfig& config) : dir_(std::move(dir)), config_(config) {
    fs::create_directories(dir_);
  }

  void csv(const std::string& name, const io::CsvTable& table) {
    if (config_.output.wants("csv")) put(name, table.str());
  }
  void json(const std::string& name, const Json& j, int indent = 2) {
    if (config_.output.wants("json")) put(name, j.dump(indent) + "\n");
  }
  void svg(const std::string& name, const io::SvgPlot& plot) {
    if (config_.output.wants("svg")) put(name, plot.str());
  }

  // Summary and metadata are written whatever the format selection.
  void summary(const Json& j) { put("summary.json", j.dump(2) + "\n"); }

  void metadata(const std::string& command, std::uint64_t seed, const Json& defaults) {
    Json artifacts = Json::object();
    for (const auto& [name, hash] : hashes_) artifacts[name] = {{"sha256", hash}};
    const Json meta{{"tool", "bezreach"},
                    {"version", "0.1.0"},
                    {"command", command},
                    {"seed", seed},
                    {"config", config_to_json(config_)},
                    {"defaults", defaults},
                    {"artifacts", artifacts}};
    io::write_file(dir_ / "metadata.json", meta.dump(2) + "\n");
  }

  const fs::path& dir() const { return dir_; }

 private:
  void put(const std::string& name, const std::string& content) {
    hashes_[name] = io::write_file(dir_ / name, content);
  }

  fs::path dir_;
  const RunConfig& config_;
  std::map<std::string, std::string> hashes_;
};

Box state_view(const RunConfig& config) {
  const auto box = bounding_box(make_constraints(config, config.constraints.u_max)
                                    .state_polytope());
  return *box;
}

std::string indexed(const std::string& stem, int i, bool sweep, const std::string& ext) {
  return sweep ? stem + "_" + std::to_string(i) + ext : stem + ext;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

int cmd_matrices(const RunConfig& c, Artifacts& out, std::uint64_t seed) {
  const int p = c.curve.order;
  const double T = c.curve.duration;
  const int gamma = c.model.gamma;
  const int m = c.model.m;
  out.csv("S.csv", io::matrix_table(diff_matrix(p, T)));
  out.csv("E.csv", io::matrix_table(elevation_matrix(p)));
  out.csv("H.csv", io::matrix_table(derivative_map(p, T)));
  out.csv("D.csv", io::matrix_table(boundary_matrix(p, gamma, T)));
  const auto Q = split_matrices(p, c.curve.segments);
  for (size_t i = 0; i < Q.size(); ++i) {
    out.csv("Q_" + std::to_string(i + 1) + ".csv", io::matrix_table(Q[i]));
  }
  const VectorizationMaps maps = vectorization_maps(p, gamma, m, T);
  out.csv("H_vec.csv", io::matrix_table(maps.H_vec));
  out.csv("D_vec.csv", io::matrix_table(maps.D_vec));
  out.csv("K_comm.csv", io::matrix_table(maps.K_comm));
  out.summary(Json{{"command", "matrices"},
                   {"order", p},
                   {"duration", T},
                   {"gamma", gamma},
                   {"m", m},
                   {"segments", c.curve.segments}});
  out.metadata("matrices", seed, Json::object());
  std::cout << "matrices written to " << out.dir().string() << "\n";
  return kExitOk;
}

int cmd_reach(const RunConfig& c, Artifacts& out, std::uint64_t seed) {
  if (!c.reach.anchor) throw ConfigError("reach.anchor", "required by the reach command");
  const Eigen::VectorXd& anchor = *c.reach.anchor;
  const int n = static_cast<int>(anchor.size());
  const bool sweep = !c.reach.u_max_sweep.empty();
  const std::vector<double> bounds =
      sweep ? c.reach.u_max_sweep : std::vector<double>{c.constraints.u_max};

  std::vector<ReachSet> sets;
  std::vector<std::vector<Eigen::VectorXd>> clouds;
  Json entries = Json::array();
  for (size_t i = 0; i < bounds.size(); ++i) {
    const ReachSpec spec = make_spec(c, bounds[i], c.curve.segments);
    ReachSet set = c.reach.forward ? spec.forward(anchor) : spec.backward(anchor);
    const auto ball = chebyshev_center(set.set);
    std::vector<Eigen::VectorXd> cloud =
        ball ? hit_and_run(set.set, ball->center, c.reach.samples, seed + i, c.reach.thin)
             : std::vector<Eigen::VectorXd>{};
    Json entry{{"u_max", bounds[i]},
               {"certified", set.certified},
               {"empty", !ball.has_value()},
               {"halfspaces", set.set.rows()},
               {"samples", cloud.size()}};
    if (ball) {
      entry["chebyshev_center"] = io::to_json(ball->center);
      entry["chebyshev_radius"] = ball->radius;
      const VolumeEstimate v = estimate_volume(set.set, c.reach.volume_draws, seed + 1000 + i);
      entry["volume"] = v.volume;
      entry["volume_draws"] = v.draws;
      if (c.curve.segments > 1 && c.curve.policy != ReferencePolicy::kFixed) {
        const ReachSpec single = make_spec(c, bounds[i], 1);
        const ReachSet coarse = c.reach.forward ? single.forward(anchor) : single.backward(anchor);
        entry["volume_single_segment"] =
            chebyshev_center(coarse.set)
                ? estimate_volume(coarse.set, c.reach.volume_draws, seed + 1000 + i).volume
                : 0.0;
      }
    } else {
      entry["cloud"] = "empty";
    }
    out.csv(indexed("halfspaces", static_cast<int>(i), sweep, ".csv"),
            io::halfspace_table(set.set));
    out.csv(indexed("cloud", static_cast<int>(i), sweep, ".csv"), io::point_table(cloud, n));
    if (set.certified) {
      out.json(indexed("certificate", static_cast<int>(i), sweep, ".json"),
               io::certificate_to_json(set.certificate));
    }
    entries.push_back(entry);
    sets.push_back(std::move(set));
    clouds.push_back(std::move(cloud));
  }
  // Subset check of each cloud against the next (larger) bound.
  for (size_t i = 0; i + 1 < sets.size(); ++i) {
    bool nested = true;
    for (const auto& x : clouds[i]) nested = nested && sets[i + 1].set.contains(x, 1e-9);
    entries[i]["nested_in_next"] = nested;
  }

  if (n == 2) {
    // Frame the clouds and the anchor, not all of C_X.
    Box view{anchor, anchor};
    for (const auto& cloud : clouds) {
      for (const auto& x : cloud) {
        view.lower = view.lower.cwiseMin(x);
        view.upper = view.upper.cwiseMax(x);
      }
    }
    const Eigen::VectorXd pad =
        (0.1 * (view.upper - view.lower)).cwiseMax(Eigen::VectorXd::Constant(2, 0.05));
    view.lower -= pad;
    view.upper += pad;
    io::SvgPlot plot(640, 480, view);
    plot.title(std::string(c.reach.forward ? "Forward" : "Backward") + " reachable set");
    plot.axis_labels("x0", "x1");
    // Largest set first so smaller ones stay visible.
    for (size_t i = clouds.size(); i-- > 0;) {
      plot.scatter(clouds[i], kPalette[i % 8]);
    }
    plot.marker(anchor, "black", c.reach.forward ? "x0" : "xT");
    out.svg("reach.svg", plot);
  }
  out.summary(Json{{"command", "reach"},
                   {"direction", c.reach.forward ? "forward" : "backward"},
                   {"anchor", io::to_json(anchor)},
                   {"sets", entries}});
  out.metadata("reach", seed, Json{{"sampling", "hit-and-run from the Chebyshev center"},
                                   {"volume", "rejection sampling on the bounding box"}});
  std::cout << "reach: " << sets.size() << " set(s) written to " << out.dir().string()
            << "\n";
  return kExitOk;
}

struct PlanOutcome {
  ReachGraph graph;
  std::vector<int> path;
  PlannedTrajectory trajectory;
  double graph_seconds = 0.0;
};

void require_inside(const RunConfig& c, const Eigen::VectorXd& x, const std::string& what) {
  const Polytope cx = make_constraints(c, c.constraints.u_max).state_polytope();
  if (!cx.contains(x, 0.0)) {
    throw PlanningInfeasible(what + " lies outside the state constraints");
  }
}

PlanOutcome run_planner(const RunConfig& c, std::uint64_t seed) {
  if (!c.planner.start) throw ConfigError("planner.start", "required for planning");
  if (!c.planner.goal) throw ConfigError("planner.goal", "required for planning");
  require_inside(c, *c.planner.start, "start");
  require_inside(c, *c.planner.goal, "goal");
  const ReachSpec spec = make_spec(c, c.constraints.u_max, c.curve.segments);
  const Box bounds = c.planner.bounds.value_or(state_view(c));
  PlanOutcome outcome;
  const auto vertices =
      sample_vertices(bounds, c.planner.vertices, seed, {*c.planner.start, *c.planner.goal});
  Timer timer;
  GraphOptions options;
  options.mode = c.planner.mode;
  outcome.graph = build_graph(vertices, spec, options, seed);
  outcome.graph_seconds = timer.seconds();
  const int start = c.planner.vertices;
  outcome.path = search(outcome.graph, start, start + 1);
  outcome.trajectory = extract_trajectory(outcome.graph, spec, outcome.path);
  return outcome;
}

RolloutResult run_rollout(const RunConfig& c, const PlannedTrajectory& trajectory,
                          std::uint64_t seed) {
  RolloutOptions options;
  options.dt = c.sim.dt;
  options.disturbance = {c.sim.policy, c.sim.inflation, seed};
  return rollout(make_model(c), trajectory, make_tracker(c), make_certificate(c),
                 make_constraints(c, c.constraints.u_max), options);
}

std::vector<Eigen::VectorXd> phase_curve(const PlannedTrajectory& trajectory, double rate) {
  std::vector<Eigen::VectorXd> out;
  if (trajectory.empty()) return out;
  const int samples = std::max(1, static_cast<int>(std::ceil(trajectory.duration() * rate)));
  for (int s = 0; s <= samples; ++s) {
    out.push_back(trajectory.state(trajectory.duration() * s / samples));
  }
  return out;
}

Json planner_defaults(const RunConfig& c) {
  return Json{{"edge_cost", c.planner.mode == EdgeMode::kDirect ? "T per edge" : "2T per edge"},
              {"vertex_sampling", "uniform on planner.bounds, start and goal appended"},
              {"tie_break", "lower vertex index first"}};
}

int cmd_plan(const RunConfig& c, Artifacts& out, std::uint64_t seed) {
  Timer total;
  PlanOutcome plan;
  try {
    plan = run_planner(c, seed);
  } catch (const UnreachableGoalError& e) {
    out.summary(Json{{"command", "plan"},
                     {"status", "unreachable"},
                     {"reason", e.what()},
                     {"component_size", e.component_size()}});
    out.metadata("plan", seed, planner_defaults(c));
    throw;
  } catch (const PlanningInfeasible& e) {
    out.summary(Json{{"command", "plan"}, {"status", "infeasible"}, {"reason", e.what()}});
    out.metadata("plan", seed, planner_defaults(c));
    throw;
  }
  const PlanningModel model = make_model(c);
  const RolloutResult result = run_rollout(c, plan.trajectory, seed);

  out.json("graph.json", io::graph_to_json(plan.graph), -1);
  out.json("trajectory.json", io::trajectory_to_json(plan.trajectory));
  out.csv("trajectory.csv", io::trajectory_table(model, plan.trajectory, c.output.sample_rate));
  out.csv("rollout.csv", io::rollout_table(result));
  if (model.n() == 2) {
    io::SvgPlot plot(640, 480, state_view(c));
    plot.title("Planned trajectory, u_max = " + io::format_double(c.constraints.u_max));
    plot.axis_labels("x0", "x1");
    plot.scatter(plan.graph.vertices, "#999999", 1.2, 0.5);
    std::vector<Eigen::VectorXd> closed_loop;
    for (int s = 0; s < result.steps(); ++s) closed_loop.push_back(result.states.col(s));
    plot.polyline(closed_loop, "#d62728", 1.0);
    plot.polyline(phase_curve(plan.trajectory, c.output.sample_rate), "#1f77b4", 2.0);
    for (int v : plan.path) plot.scatter({plan.graph.vertices[v]}, "#1f77b4", 3.0, 1.0);
    plot.marker(*c.planner.start, "#2ca02c", "start");
    plot.marker(*c.planner.goal, "#9467bd", "goal");
    out.svg("plan.svg", plot);
  }
  Json summary{{"command", "plan"},
               {"status", result.violation ? "monitor_failed" : "ok"},
               {"vertices", plan.graph.size()},
               {"edges", plan.graph.edge_count()},
               {"path", plan.path},
               {"edges_traversed", plan.path.size() - 1},
               {"duration", plan.trajectory.duration()},
               {"junction_gap", plan.trajectory.max_junction_gap()},
               {"disturbance", disturbance_name(c.sim.policy)},
               {"monitor", io::margins_to_json(result.margins)}};
  if (c.output.timing) {
    summary["timing"] = {{"graph_seconds", plan.graph_seconds},
                         {"total_seconds", total.seconds()}};
  }
  out.summary(summary);
  out.metadata("plan", seed, planner_defaults(c));
  std::cout << "plan: " << plan.graph.size() << " vertices, " << plan.graph.edge_count()
            << " edges, " << plan.path.size() - 1 << " edges traversed, monitor "
            << (result.violation ? "FAILED" : "passed") << " (" << total.seconds()
            << " s)\n";
  if (result.violation) {
    throw NumericalError("certified plan violated the closed-loop monitor");
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& c, Artifacts& out, std::uint64_t seed) {
  PlannedTrajectory trajectory;
  std::string source;
  if (!c.sim.trajectory.empty()) {
    const fs::path path = fs::path(c.sim.trajectory).is_absolute()
                              ? fs::path(c.sim.trajectory)
                              : c.base_directory / c.sim.trajectory;
    std::ifstream in(path);
    if (!in) throw ConfigError("sim.trajectory", "cannot read " + path.string());
    try {
      trajectory = io::trajectory_from_json(Json::parse(in));
    } catch (const Json::exception& e) {
      throw ConfigError("sim.trajectory", e.what());
    } catch (const StructuralError& e) {
      throw ConfigError("sim.trajectory", e.what());
    }
    source = "file";
  } else {
    trajectory = run_planner(c, seed).trajectory;
    source = "planner";
  }
  Json runs = Json::array();
  bool pass = true;
  for (int s = 0; s < c.sim.seeds; ++s) {
    const RolloutResult result = run_rollout(c, trajectory, seed + s);
    out.csv("rollout_" + std::to_string(s) + ".csv", io::rollout_table(result));
    Json entry = io::margins_to_json(result.margins);
    entry["seed"] = seed + s;
    runs.push_back(entry);
    pass = pass && !result.violation;
  }
  out.json("trajectory.json", io::trajectory_to_json(trajectory));
  out.summary(Json{{"command", "simulate"},
                   {"trajectory_source", source},
                   {"disturbance", disturbance_name(c.sim.policy)},
                   {"inflation", c.sim.inflation},
                   {"pass", pass},
                   {"rollouts", runs}});
  out.metadata("simulate", seed, Json{{"rollout", "fixed-step RK4"},
                                      {"error_injection", "tube corner per step"}});
  std::cout << "simulate: " << c.sim.seeds << " rollout(s), monitor "
            << (pass ? "passed" : "found violations") << "\n";
  return kExitOk;
}

}  // namespace
}  // namespace bezreach

int main(int argc, char** argv) {
  using namespace bezreach;
  CLI::App app{"Bezier reachable polytopes: certificates, reachable sets, planning"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string command;
  const std::pair<const char*, const char*> commands[] = {
      {"matrices", "write the Bezier operator matrices"},
      {"reach", "forward or backward reachable polytopes with sample clouds"},
      {"plan", "sample a graph of reachable sets and extract a trajectory"},
      {"simulate", "closed-loop rollouts of a trajectory under disturbance"}};
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output.directory)");
    sub->add_option("--seed", seed, "RNG seed (overrides planner.seed)");
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig config = load_config(config_path);
    if (seed) config.planner.seed = *seed;
    if (!out_dir.empty()) config.output.directory = out_dir;
    Artifacts out(config.output.directory, config);
    const std::uint64_t s = config.planner.seed;
    if (command == "matrices") return cmd_matrices(config, out, s);
    if (command == "reach") return cmd_reach(config, out, s);
    if (command == "plan") return cmd_plan(config, out, s);
    return cmd_simulate(config, out, s);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnreachableGoalError& e) {
    std::cerr << "planning infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const PlanningInfeasible& e) {
    std::cerr << "planning infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InfeasibleCertificateError& e) {
    std::cerr << "planning infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const InfeasibleReductionError& e) {
    std::cerr << "planning infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const InternalInconsistencyError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularityError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}
