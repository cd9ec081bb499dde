#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bezreach/constraints.h"
#include "bezreach/lp.h"

namespace bezreach {

// How the per-segment reference points of a certificate are chosen from the
// anchor state (x0 for forward sets, xT for backward sets).
enum class ReferencePolicy {
  kConstant,   // every segment uses the anchor
  kDriftFlow,  // the unforced flow through the anchor, at segment midpoints
  kFixed,      // a supplied list, independent of the anchor
};

// Right inverse used to turn boundary states into control points.
enum class BoundarySolver {
  kMinEnergy,  // least squared gamma-th derivative control points
  kMinNorm,    // Moore-Penrose pseudo-inverse
};

// Unforced model flow over signed time t, by fixed-step RK4.
Eigen::VectorXd drift_flow(const PlanningModel& model, const Eigen::VectorXd& x,
                           double t, int steps);

// Forward set {xT} of x0, or backward set {x0} of xT, together with the
// certificate it was built from.
struct ReachSet {
  Eigen::VectorXd anchor;
  bool forward = true;
  // False when no certificate exists at the anchor; `set` is then empty.
  bool certified = true;
  CertificatePolytope certificate;
  Polytope set;
};

class ReachSpec {
 public:
  ReachSpec(CertificateSynthesizer synth,
            ReferencePolicy policy = ReferencePolicy::kConstant,
            std::vector<Eigen::VectorXd> fixed_references = {},
            BoundarySolver solver = BoundarySolver::kMinEnergy);

  const CertificateSynthesizer& synthesizer() const { return synth_; }
  ReferencePolicy policy() const { return policy_; }
  BoundarySolver solver() const { return solver_; }
  int state_dim() const { return synth_.model().n(); }
  int order() const { return synth_.order(); }
  double duration() const { return synth_.duration(); }
  // m(p+1) x 2n map from [x0; xT] to vec(points) of the connecting curve.
  const Eigen::MatrixXd& boundary_solver() const { return boundary_vec_; }

  std::vector<Eigen::VectorXd> references(const Eigen::VectorXd& anchor,
                                          bool forward) const;

  ReachSet forward(const Eigen::VectorXd& x0) const;
  ReachSet backward(const Eigen::VectorXd& xT) const;

  // Control points of the curve from x0 to xT.
  Eigen::MatrixXd connect(const Eigen::VectorXd& x0,
                          const Eigen::VectorXd& xT) const;

 private:
  ReachSet make_set(const Eigen::VectorXd& anchor, bool forward) const;

  CertificateSynthesizer synth_;
  ReferencePolicy policy_;
  BoundarySolver solver_;
  std::vector<Eigen::VectorXd> fixed_refs_;
  Eigen::MatrixXd boundary_;      // 2 gamma x (p+1)
  Eigen::MatrixXd boundary_vec_;  // m(p+1) x 2n
};

// A point w in from.set and to.set, where `from` is a forward set and `to` a
// backward set. Only strictly feasible intersections count, so that the
// witness survives re-checking with a tolerance.
std::optional<Eigen::VectorXd> edge_feasible(const ReachSet& from,
                                             const ReachSet& to);
std::optional<Eigen::VectorXd> edge_feasible(const ReachSpec& spec,
                                             const Eigen::VectorXd& vi,
                                             const Eigen::VectorXd& vj);

// Hit-and-run samples from a bounded polytope, starting at an interior point.
// `thin` chords are taken between returned samples.
std::vector<Eigen::VectorXd> hit_and_run(const Polytope& P,
                                         const Eigen::VectorXd& start, int count,
                                         std::uint64_t seed, int thin = 10);

// Hit-and-run from the Chebyshev center. Empty when P is empty.
std::vector<Eigen::VectorXd> sample_polytope(const Polytope& P, int count,
                                             std::uint64_t seed, int thin = 10);

struct VolumeEstimate {
  double volume = 0.0;
  long accepted = 0;
  long draws = 0;
  Box box;
};

// Rejection sampling on the bounding box.
VolumeEstimate estimate_volume(const Polytope& P, long draws, std::uint64_t seed);

}  // namespace bezreach
