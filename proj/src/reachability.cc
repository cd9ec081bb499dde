#include "bezreach/reachability.h"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "bezreach/errors.h"
#include "bezreach/simd/kernels.h"

namespace bezreach {

Eigen::VectorXd drift_flow(const PlanningModel& model, const Eigen::VectorXd& x,
                           double t, int steps) {
  if (steps < 1) throw DomainError("drift flow needs at least one step");
  const Eigen::VectorXd u = Eigen::VectorXd::Zero(model.m());
  const double h = t / steps;
  Eigen::VectorXd y = x;
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = model.dynamics(y, u);
    const Eigen::VectorXd k2 = model.dynamics(y + 0.5 * h * k1, u);
    const Eigen::VectorXd k3 = model.dynamics(y + 0.5 * h * k2, u);
    const Eigen::VectorXd k4 = model.dynamics(y + h * k3, u);
    y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  if (!y.allFinite()) throw NumericalError("drift flow diverged");
  return y;
}

ReachSpec::ReachSpec(CertificateSynthesizer synth, ReferencePolicy policy,
                     std::vector<Eigen::VectorXd> fixed_references,
                     BoundarySolver solver)
    : synth_(std::move(synth)),
      policy_(policy),
      solver_(solver),
      fixed_refs_(std::move(fixed_references)) {
  const int gamma = synth_.model().gamma();
  const int m = synth_.model().m();
  if (synth_.order() < 2 * gamma - 1) {
    throw InsufficientOrderError(synth_.order(), gamma);
  }
  if (policy_ == ReferencePolicy::kFixed) {
    if (static_cast<int>(fixed_refs_.size()) != synth_.segments()) {
      throw StructuralError("fixed references must give one point per segment");
    }
    for (const auto& ref : fixed_refs_) {
      if (ref.size() != state_dim()) {
        throw StructuralError("fixed reference has wrong dimension");
      }
    }
  }
  boundary_ = solver_ == BoundarySolver::kMinEnergy
                  ? min_energy_boundary_inverse(synth_.order(), gamma,
                                                synth_.duration())
                  : boundary_inverse(boundary_matrix(synth_.order(), gamma,
                                                     synth_.duration()));
  boundary_vec_ = Eigen::kroneckerProduct(boundary_.transpose(),
                                          Eigen::MatrixXd::Identity(m, m));
}

std::vector<Eigen::VectorXd> ReachSpec::references(const Eigen::VectorXd& anchor,
                                                   bool forward) const {
  const int k = synth_.segments();
  switch (policy_) {
    case ReferencePolicy::kConstant:
      return std::vector<Eigen::VectorXd>(k, anchor);
    case ReferencePolicy::kFixed:
      return fixed_refs_;
    case ReferencePolicy::kDriftFlow:
      break;
  }
  // Walk half a segment at a time and keep the midpoints.
  const double half = duration() / (2 * k);
  constexpr int kSubsteps = 8;
  std::vector<Eigen::VectorXd> refs(k);
  Eigen::VectorXd x = anchor;
  if (forward) {
    for (int i = 0; i < k; ++i) {
      x = drift_flow(synth_.model(), x, half, kSubsteps);
      refs[i] = x;
      x = drift_flow(synth_.model(), x, half, kSubsteps);
    }
  } else {
    for (int i = k - 1; i >= 0; --i) {
      x = drift_flow(synth_.model(), x, -half, kSubsteps);
      refs[i] = x;
      x = drift_flow(synth_.model(), x, -half, kSubsteps);
    }
  }
  return refs;
}

ReachSet ReachSpec::make_set(const Eigen::VectorXd& anchor, bool forward) const {
  const int n = state_dim();
  if (anchor.size() != n) throw StructuralError("anchor has wrong dimension");
  ReachSet out;
  out.anchor = anchor;
  out.forward = forward;
  try {
    out.certificate = synth_.synthesize(references(anchor, forward));
  } catch (const InfeasibleCertificateError&) {
    out.certified = false;
  } catch (const InfeasibleReductionError&) {
    out.certified = false;
  }
  if (!out.certified) {
    out.set = Polytope(Eigen::MatrixXd::Zero(1, n), Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }
  // F vec(p) = F0 x0 + FT xT.
  const Eigen::MatrixXd FD = out.certificate.F * boundary_vec_;
  if (forward) {
    out.set = Polytope(FD.rightCols(n), out.certificate.G - FD.leftCols(n) * anchor);
  } else {
    out.set = Polytope(FD.leftCols(n), out.certificate.G - FD.rightCols(n) * anchor);
  }
  return out;
}

ReachSet ReachSpec::forward(const Eigen::VectorXd& x0) const {
  return make_set(x0, true);
}

ReachSet ReachSpec::backward(const Eigen::VectorXd& xT) const {
  return make_set(xT, false);
}

Eigen::MatrixXd ReachSpec::connect(const Eigen::VectorXd& x0,
                                   const Eigen::VectorXd& xT) const {
  const int n = state_dim();
  if (x0.size() != n || xT.size() != n) {
    throw StructuralError("boundary states have wrong dimension");
  }
  Eigen::VectorXd boundary(2 * n);
  boundary << x0, xT;
  const Eigen::VectorXd v = boundary_vec_ * boundary;
  return v.reshaped(synth_.model().m(), synth_.order() + 1);
}

std::optional<Eigen::VectorXd> edge_feasible(const ReachSet& from,
                                             const ReachSet& to) {
  if (!from.certified || !to.certified) return std::nullopt;
  const auto ball = chebyshev_center(from.set.intersect(to.set));
  if (!ball || !(ball->radius > 1e-9)) return std::nullopt;
  return ball->center;
}

std::optional<Eigen::VectorXd> edge_feasible(const ReachSpec& spec,
                                             const Eigen::VectorXd& vi,
                                             const Eigen::VectorXd& vj) {
  return edge_feasible(spec.forward(vi), spec.backward(vj));
}

std::vector<Eigen::VectorXd> hit_and_run(const Polytope& P,
                                         const Eigen::VectorXd& start, int count,
                                         std::uint64_t seed, int thin) {
  const int n = P.dim();
  if (start.size() != n) throw StructuralError("start point has wrong dimension");
  if (thin < 1 || count < 0) throw DomainError("hit-and-run needs thin >= 1");
  const auto& kern = simd::kernels();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  Eigen::VectorXd x = start;
  Eigen::VectorXd dir(n);
  for (int s = 0; s < count; ++s) {
    for (int t = 0; t < thin; ++t) {
      for (int i = 0; i < n; ++i) dir(i) = normal(rng);
      dir.normalize();
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      kern.chord(P.A().data(), P.A().rows(), P.rows(), n, x.data(), dir.data(),
                 P.b().data(), 1e-14, &lo, &hi);
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("hit-and-run needs a bounded polytope");
      }
      // Round-off can leave the point a hair outside; stay put then.
      if (hi < lo) {
        lo = 0.0;
        hi = 0.0;
      }
      kern.axpy(n, lo + (hi - lo) * unit(rng), dir.data(), x.data());
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Eigen::VectorXd> sample_polytope(const Polytope& P, int count,
                                             std::uint64_t seed, int thin) {
  const auto ball = chebyshev_center(P);
  if (!ball) return {};
  return hit_and_run(P, ball->center, count, seed, thin);
}

VolumeEstimate estimate_volume(const Polytope& P, long draws, std::uint64_t seed) {
  VolumeEstimate out;
  const auto box = bounding_box(P);
  if (!box) return out;
  if (!box->lower.allFinite() || !box->upper.allFinite()) {
    throw DomainError("volume estimate needs a bounded polytope");
  }
  out.box = *box;
  const int n = P.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (long d = 0; d < draws; ++d) {
    for (int i = 0; i < n; ++i) {
      x(i) = box->lower(i) + (box->upper(i) - box->lower(i)) * unit(rng);
    }
    out.accepted += P.contains(x, 0.0);
  }
  out.draws = draws;
  const double box_volume = (box->upper - box->lower).prod();
  out.volume = draws > 0 ? box_volume * out.accepted / draws : 0.0;
  return out;
}

}  // namespace bezreach
