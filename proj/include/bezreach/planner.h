#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bezreach/bezier.h"
#include "bezreach/constraints.h"
#include "bezreach/lp.h"
#include "bezreach/reachability.h"

namespace bezreach {

// Worker count for parallel batches: BEZREACH_THREADS if set and positive,
// else the hardware concurrency.
int worker_threads();

// `count` uniform samples from `bounds`, followed by `extra` (start, goal).
std::vector<Eigen::VectorXd> sample_vertices(
    const Box& bounds, int count, std::uint64_t seed,
    const std::vector<Eigen::VectorXd>& extra = {});

enum class EdgeMode {
  kIntersection,  // F(vi) and B(vj) share a witness w: two horizons
  kDirect,        // vj in F(vi): one horizon
};

struct GraphEdge {
  int to = 0;
  Eigen::VectorXd witness;
  double cost = 0.0;
};

struct GraphOptions {
  EdgeMode mode = EdgeMode::kIntersection;
  int threads = 0;  // 0 means worker_threads()
};

struct ReachGraph {
  std::vector<Eigen::VectorXd> vertices;
  // Out-edges of each vertex, sorted by target.
  std::vector<std::vector<GraphEdge>> adjacency;
  std::uint64_t seed = 0;
  EdgeMode mode = EdgeMode::kIntersection;
  long candidate_pairs = 0;  // pairs that reached the LP
  int uncertified = 0;       // vertices without a forward certificate

  int size() const { return static_cast<int>(vertices.size()); }
  long edge_count() const;
  const GraphEdge* find_edge(int from, int to) const;
};

ReachGraph build_graph(const std::vector<Eigen::VectorXd>& vertices,
                       const ReachSpec& spec, const GraphOptions& options = {},
                       std::uint64_t seed = 0);

// Uniform-cost search; among equal-cost paths the one found by expanding
// lower vertex indices first. Throws UnreachableGoalError.
std::vector<int> search(const ReachGraph& graph, int start, int goal);

// Piecewise output trajectory; segment i is an output curve on
// [start_times[i], start_times[i] + duration].
class PlannedTrajectory {
 public:
  PlannedTrajectory() = default;
  PlannedTrajectory(int gamma, std::vector<BezierCurve> segments,
                    std::vector<CertificatePolytope> certificates);

  int gamma() const { return gamma_; }
  int m() const;
  bool empty() const { return segments_.empty(); }
  const std::vector<BezierCurve>& segments() const { return segments_; }
  const std::vector<CertificatePolytope>& certificates() const {
    return certificates_;
  }
  double duration() const { return duration_; }

  // Derivatives 0..gamma of the output at t, as columns (m x (gamma+1)).
  Eigen::MatrixXd derivatives(double t) const;
  Eigen::VectorXd state(double t) const;

  // Largest jump in derivatives 0..gamma-1 across segment junctions.
  double max_junction_gap() const;

 private:
  int gamma_ = 0;
  std::vector<BezierCurve> segments_;
  std::vector<std::vector<BezierCurve>> derivs_;  // per segment, orders 0..gamma
  std::vector<CertificatePolytope> certificates_;
  std::vector<double> start_times_;
  double duration_ = 0.0;
};

// Rebuilds the curves of each path edge and re-checks them against their
// certificates. Throws InternalInconsistencyError on a failed re-check.
PlannedTrajectory extract_trajectory(const ReachGraph& graph,
                                     const ReachSpec& spec,
                                     const std::vector<int>& path);

}  // namespace bezreach
