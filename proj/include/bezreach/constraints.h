#pragma once

#include <vector>

#include <Eigen/Dense>

#include "bezreach/bezier.h"
#include "bezreach/lp.h"
#include "bezreach/models.h"

namespace bezreach {

// a1^T x_d + a2 ||x_d - x_ref|| + a3 ||u_d|| <= b
struct MixedConstraintRow {
  Eigen::VectorXd a1;
  double a2 = 0.0;
  double a3 = 0.0;
  double b = 0.0;
};

// Bounds on sigma = (||x_d - x_ref||, ||q^(gamma) - f(x_ref)||) over which
// the quadratic input bound is linearized. Enforced as extra rows.
struct SigmaBox {
  double x_radius = 0.0;
  double q_radius = 0.0;
};

// L [x_d; q^(gamma)] <= h, with columns ordered as x_d (n) then q^(gamma) (m).
struct LiftedLinearConstraints {
  Eigen::MatrixXd L;
  Eigen::VectorXd h;
  Eigen::VectorXd reference;
  SigmaBox sigma;
  // Per source row: direction c = (c1, c2) and level delta*.
  std::vector<Eigen::Vector2d> directions;
  std::vector<double> levels;
};

// F vec(p) <= G on the control points of an output curve.
struct CertificatePolytope {
  Eigen::MatrixXd F;
  Eigen::VectorXd G;
  int order = 0;
  int gamma = 0;
  int m = 0;
  double duration = 0.0;
  int segments = 1;
  std::vector<Eigen::VectorXd> references;

  Polytope polytope() const { return Polytope(F, G); }
  // max_i (F_i v - G_i) / max(1, ||F_i||), for v = vec(points).
  double scaled_violation(const Eigen::MatrixXd& points) const;
  bool accepts(const Eigen::MatrixXd& points, double tol = kLpTolerance) const {
    return scaled_violation(points) <= tol;
  }
};

// Input bound at x_ref for ||k|| <= u_max. Throws InfeasibleCertificateError
// when the tracker alone consumes the budget.
MixedConstraintRow input_constraint_row(const TrackingCertificate& cert,
                                        const Eigen::VectorXd& x_ref,
                                        double u_max);

// Tightened state rows: for each row c of C,
//   c x_d + L_Pi L_e ||c||_1 ||u_d|| <= d - L_Pi e0 ||c||_1.
std::vector<MixedConstraintRow> state_constraint_rows(
    const ConstraintSet& cs, const TrackingCertificate& cert);

// Sigma box around x_ref: the farthest C_X extreme in the infinity norm, and
// the matching bound on q^(gamma) implied by the input rows.
SigmaBox sigma_box_for(const PlanningModel& model, const Box& state_box,
                       const Eigen::VectorXd& x_ref, double input_bound);

LiftedLinearConstraints lemma3_reduce(const std::vector<MixedConstraintRow>& rows,
                                      const PlanningModel& model,
                                      const Eigen::VectorXd& x_ref,
                                      const SigmaBox& sigma);

// Applies (L, h) to every column of [P; p H^gamma].
CertificatePolytope theorem1_assemble(const LiftedLinearConstraints& lifted,
                                      int order, double duration,
                                      const VectorizationMaps& maps);

// Stacks segment certificates of the uniform k-refinement, each composed with
// vec(Q_i). `segment_maps` must be built for duration T/k.
CertificatePolytope corollary1_refine(
    const std::vector<LiftedLinearConstraints>& segments, int order,
    double duration, const std::vector<Eigen::MatrixXd>& split,
    const VectorizationMaps& segment_maps);

// All of the above for one model, certificate and constraint set.
class CertificateSynthesizer {
 public:
  CertificateSynthesizer(PlanningModel model, TrackingCertificate cert,
                         ConstraintSet cs, int order, double duration,
                         int segments);

  const PlanningModel& model() const { return model_; }
  const TrackingCertificate& certificate() const { return cert_; }
  const ConstraintSet& constraints() const { return cs_; }
  int order() const { return order_; }
  double duration() const { return duration_; }
  int segments() const { return segments_; }
  const Box& state_box() const { return state_box_; }

  // Mixed rows for one reference point (input row first).
  std::vector<MixedConstraintRow> mixed_rows(const Eigen::VectorXd& x_ref) const;
  LiftedLinearConstraints lift(const Eigen::VectorXd& x_ref) const;

  // One reference per segment.
  CertificatePolytope synthesize(const std::vector<Eigen::VectorXd>& refs) const;

 private:
  PlanningModel model_;
  TrackingCertificate cert_;
  ConstraintSet cs_;
  int order_;
  double duration_;
  int segments_;
  Box state_box_;
  std::vector<MixedConstraintRow> state_rows_;
  std::vector<Eigen::MatrixXd> split_;
  VectorizationMaps segment_maps_;
};

}  // namespace bezreach
