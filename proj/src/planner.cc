#include "bezreach/planner.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <queue>
#include <random>
#include <string>
#include <thread>

#include "bezreach/errors.h"

namespace bezreach {
namespace {

// Runs body(i) for i in [0, count) on up to `threads` workers. The first
// exception thrown by any worker is rethrown here.
template <typename Body>
void parallel_for(long count, int threads, Body body) {
  const int workers =
      static_cast<int>(std::min<long>(std::max(threads, 1), std::max(count, 1L)));
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

// True when x clears every row of P by more than the edge radius threshold,
// which makes the Chebyshev radius of any intersection containing it large
// enough as well.
bool strictly_inside(const Polytope& P, const Eigen::VectorXd& x) {
  for (int i = 0; i < P.rows(); ++i) {
    const double norm = P.A().row(i).norm();
    if (norm < 1e-9) {
      if (P.b()(i) < 0) return false;
      continue;
    }
    if (!((P.b()(i) - P.A().row(i).dot(x)) / norm > 2e-9)) return false;
  }
  return true;
}

bool boxes_overlap(const Box& a, const Box& b) {
  return (a.lower.array() <= b.upper.array()).all() &&
         (b.lower.array() <= a.upper.array()).all();
}

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("BEZREACH_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) {
      return static_cast<int>(std::min(value, 1024L));
    }
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<Eigen::VectorXd> sample_vertices(
    const Box& bounds, int count, std::uint64_t seed,
    const std::vector<Eigen::VectorXd>& extra) {
  if (count <= 0 && extra.empty()) throw DomainError("graph would have no vertices");
  if (count < 0) throw DomainError("vertex count must be nonnegative");
  const int n = static_cast<int>(bounds.lower.size());
  if (bounds.upper.size() != n) throw StructuralError("box bounds differ in size");
  if (!bounds.lower.allFinite() || !bounds.upper.allFinite() ||
      (bounds.lower.array() > bounds.upper.array()).any()) {
    throw DomainError("sampling box must be finite with lower <= upper");
  }
  // Uniform doubles built from the raw engine output so the vertex list does
  // not depend on the standard library's distribution implementation.
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count + extra.size());
  for (int s = 0; s < count; ++s) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v(i) = bounds.lower(i) + (bounds.upper(i) - bounds.lower(i)) * u;
    }
    out.push_back(std::move(v));
  }
  for (const auto& v : extra) {
    if (v.size() != n) throw StructuralError("extra vertex has wrong dimension");
    out.push_back(v);
  }
  return out;
}

long ReachGraph::edge_count() const {
  long total = 0;
  for (const auto& out : adjacency) total += static_cast<long>(out.size());
  return total;
}

const GraphEdge* ReachGraph::find_edge(int from, int to) const {
  if (from < 0 || from >= size()) return nullptr;
  const auto& out = adjacency[from];
  auto it = std::lower_bound(out.begin(), out.end(), to,
                             [](const GraphEdge& e, int v) { return e.to < v; });
  return it != out.end() && it->to == to ? &*it : nullptr;
}

ReachGraph build_graph(const std::vector<Eigen::VectorXd>& vertices,
                       const ReachSpec& spec, const GraphOptions& options,
                       std::uint64_t seed) {
  const int V = static_cast<int>(vertices.size());
  if (V == 0) throw DomainError("graph would have no vertices");
  for (const auto& v : vertices) {
    if (v.size() != spec.state_dim()) {
      throw StructuralError("vertex has wrong dimension");
    }
  }
  const int threads = options.threads > 0 ? options.threads : worker_threads();
  const bool direct = options.mode == EdgeMode::kDirect;

  std::vector<ReachSet> fwd(V), bwd(V);
  std::vector<std::optional<Box>> fwd_box(V), bwd_box(V);
  std::vector<std::optional<Eigen::VectorXd>> fwd_center(V), bwd_center(V);
  // Rows slack on the whole bounding box are redundant; dropping them keeps
  // the set and shortens every pairwise LP.
  auto prepare = [](ReachSet& set, std::optional<Box>& box,
                    std::optional<Eigen::VectorXd>& center) {
    if (!set.certified) return;
    box = bounding_box(set.set);
    if (!box) return;
    set.set = drop_rows_implied_by_box(set.set, *box);
    if (const auto ball = chebyshev_center(set.set)) center = ball->center;
  };
  parallel_for(V, threads, [&](long i) {
    fwd[i] = spec.forward(vertices[i]);
    prepare(fwd[i], fwd_box[i], fwd_center[i]);
    if (!direct) {
      bwd[i] = spec.backward(vertices[i]);
      prepare(bwd[i], bwd_box[i], bwd_center[i]);
    }
  });

  // Disjoint bounding boxes rule an edge out without an LP.
  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < V; ++i) {
    if (!fwd_box[i]) continue;
    for (int j = 0; j < V; ++j) {
      if (direct) {
        const Box& b = *fwd_box[i];
        if ((vertices[j].array() >= b.lower.array()).all() &&
            (vertices[j].array() <= b.upper.array()).all()) {
          candidates.emplace_back(i, j);
        }
      } else if (bwd_box[j] && boxes_overlap(*fwd_box[i], *bwd_box[j])) {
        candidates.emplace_back(i, j);
      }
    }
  }

  const double cost = (direct ? 1.0 : 2.0) * spec.duration();
  std::vector<std::optional<Eigen::VectorXd>> witness(candidates.size());
  parallel_for(static_cast<long>(candidates.size()), threads, [&](long c) {
    const auto [i, j] = candidates[c];
    if (direct) {
      if (fwd[i].set.contains(vertices[j], 0.0)) witness[c] = vertices[j];
    } else if (fwd_center[i] && strictly_inside(bwd[j].set, *fwd_center[i]) &&
               strictly_inside(fwd[i].set, *fwd_center[i])) {
      witness[c] = fwd_center[i];
    } else if (bwd_center[j] && strictly_inside(fwd[i].set, *bwd_center[j]) &&
               strictly_inside(bwd[j].set, *bwd_center[j])) {
      witness[c] = bwd_center[j];
    } else {
      witness[c] = edge_feasible(fwd[i], bwd[j]);
    }
  });

  ReachGraph graph;
  graph.vertices = vertices;
  graph.adjacency.resize(V);
  graph.seed = seed;
  graph.mode = options.mode;
  graph.candidate_pairs = static_cast<long>(candidates.size());
  for (int i = 0; i < V; ++i) graph.uncertified += !fwd[i].certified;
  for (size_t c = 0; c < candidates.size(); ++c) {
    if (!witness[c]) continue;
    graph.adjacency[candidates[c].first].push_back(
        GraphEdge{candidates[c].second, std::move(*witness[c]), cost});
  }
  return graph;
}

std::vector<int> search(const ReachGraph& graph, int start, int goal) {
  const int V = graph.size();
  if (start < 0 || start >= V || goal < 0 || goal >= V) {
    throw DomainError("start and goal must be graph vertices");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(V, kInf);
  std::vector<int> parent(V, -1);
  std::vector<bool> done(V, false);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  dist[start] = 0.0;
  open.emplace(0.0, start);
  int settled = 0;
  while (!open.empty()) {
    const auto [d, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = true;
    ++settled;
    if (u == goal) break;
    for (const auto& e : graph.adjacency[u]) {
      const double nd = d + e.cost;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        parent[e.to] = u;
        open.emplace(nd, e.to);
      }
    }
  }
  if (!done[goal]) throw UnreachableGoalError(start, goal, settled);
  std::vector<int> path;
  for (int v = goal; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

PlannedTrajectory::PlannedTrajectory(int gamma, std::vector<BezierCurve> segments,
                                     std::vector<CertificatePolytope> certificates)
    : gamma_(gamma),
      segments_(std::move(segments)),
      certificates_(std::move(certificates)) {
  if (gamma_ < 1) throw DomainError("relative degree must be positive");
  if (!certificates_.empty() && certificates_.size() != segments_.size()) {
    throw StructuralError("one certificate per segment expected");
  }
  double t = 0.0;
  for (const auto& seg : segments_) {
    if (seg.dim() != segments_.front().dim()) {
      throw StructuralError("segments differ in output dimension");
    }
    start_times_.push_back(t);
    t += seg.duration();
    std::vector<BezierCurve> chain{seg};
    for (int r = 1; r <= gamma_; ++r) chain.push_back(chain.back().derivative());
    derivs_.push_back(std::move(chain));
  }
  duration_ = t;
}

int PlannedTrajectory::m() const {
  return segments_.empty() ? 0 : segments_.front().dim();
}

Eigen::MatrixXd PlannedTrajectory::derivatives(double t) const {
  if (segments_.empty()) throw DomainError("trajectory is empty");
  const double slack = 1e-9 * std::max(1.0, duration_);
  if (t < -slack || t > duration_ + slack) {
    throw DomainError("time " + std::to_string(t) + " outside trajectory");
  }
  t = std::clamp(t, 0.0, duration_);
  const auto it = std::upper_bound(start_times_.begin(), start_times_.end(), t);
  const size_t i = static_cast<size_t>(std::max<long>(0, it - start_times_.begin() - 1));
  const double local = std::clamp(t - start_times_[i], 0.0, segments_[i].duration());
  Eigen::MatrixXd out(m(), gamma_ + 1);
  for (int r = 0; r <= gamma_; ++r) out.col(r) = derivs_[i][r].eval(local);
  return out;
}

Eigen::VectorXd PlannedTrajectory::state(double t) const {
  const Eigen::MatrixXd d = derivatives(t);
  return d.leftCols(gamma_).reshaped();
}

double PlannedTrajectory::max_junction_gap() const {
  double gap = 0.0;
  for (size_t i = 0; i + 1 < segments_.size(); ++i) {
    for (int r = 0; r < gamma_; ++r) {
      const Eigen::VectorXd end = derivs_[i][r].eval(segments_[i].duration());
      const Eigen::VectorXd begin = derivs_[i + 1][r].eval(0.0);
      gap = std::max(gap, (end - begin).lpNorm<Eigen::Infinity>());
    }
  }
  return gap;
}

PlannedTrajectory extract_trajectory(const ReachGraph& graph,
                                     const ReachSpec& spec,
                                     const std::vector<int>& path) {
  constexpr double kRecheck = 1e-8;
  const int gamma = spec.synthesizer().model().gamma();
  std::vector<BezierCurve> segments;
  std::vector<CertificatePolytope> certs;
  auto add = [&](const ReachSet& set, const Eigen::VectorXd& a,
                 const Eigen::VectorXd& b) {
    if (!set.certified) {
      throw InternalInconsistencyError("path edge has no certificate");
    }
    const Eigen::MatrixXd points = spec.connect(a, b);
    const double violation = set.certificate.scaled_violation(points);
    if (!(violation <= kRecheck)) {
      throw InternalInconsistencyError("extracted segment violates its certificate by " +
                                       std::to_string(violation));
    }
    segments.emplace_back(points, spec.duration());
    certs.push_back(set.certificate);
  };
  for (size_t s = 0; s + 1 < path.size(); ++s) {
    const int i = path[s];
    const int j = path[s + 1];
    const GraphEdge* edge = graph.find_edge(i, j);
    if (edge == nullptr) {
      throw DomainError("path step " + std::to_string(i) + " -> " +
                        std::to_string(j) + " is not a graph edge");
    }
    const Eigen::VectorXd& vi = graph.vertices[i];
    const Eigen::VectorXd& vj = graph.vertices[j];
    if (graph.mode == EdgeMode::kDirect) {
      add(spec.forward(vi), vi, vj);
    } else {
      add(spec.forward(vi), vi, edge->witness);
      add(spec.backward(vj), edge->witness, vj);
    }
  }
  if (segments.empty()) return PlannedTrajectory(gamma, {}, {});
  return PlannedTrajectory(gamma, std::move(segments), std::move(certs));
}

}  // namespace bezreach
