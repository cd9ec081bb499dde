#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include <Eigen/Dense>

#include "bezreach/lp.h"

namespace bezreach {

// Reduced-order model with gamma stacked output derivatives,
//   x = [q; q'; ...; q^(gamma-1)],   q^(gamma) = f(x) + g(x) u,
// where q, u are in R^m and x in R^n, n = gamma m.
class PlanningModel {
 public:
  using Drift = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using Actuation = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  struct Lipschitz {
    double f = 0.0;             // of the drift, infinity norm on C_X
    double g_inverse = 0.0;     // of g^{-1}
    double g_bound = 1.0;       // sup ||g(x)|| over C_X
  };

  PlanningModel(std::string name, int gamma, int m, Drift drift,
                Actuation actuation, Lipschitz constants);

  const std::string& name() const { return name_; }
  int gamma() const { return gamma_; }
  int m() const { return m_; }
  int n() const { return gamma_ * m_; }
  const Lipschitz& lipschitz() const { return constants_; }

  Eigen::VectorXd drift(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd actuation(const Eigen::VectorXd& x) const;
  // Throws SingularityError when g(x) is numerically singular.
  Eigen::MatrixXd actuation_inverse(const Eigen::VectorXd& x) const;

  // dx/dt under input u.
  Eigen::VectorXd dynamics(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const;

 private:
  std::string name_;
  int gamma_;
  int m_;
  Drift drift_;
  Actuation actuation_;
  Lipschitz constants_;
};

// Pendulum with theta = 0 hanging down:
//   theta'' = -(g/l) sin(theta) + (1 + ripple sin(theta)) u / (m l^2).
// A nonzero ripple in [0, 1) gives a state-dependent actuation gain and is
// used to exercise the g^{-1} Lipschitz terms.
PlanningModel pendulum_model(double mass, double length, double gravity,
                             double ripple = 0.0);

PlanningModel integrator_chain(int gamma, int m);

// u_d = g(x)^{-1} (q^(gamma) - f(x))
Eigen::VectorXd flat_input(const PlanningModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& q_gamma);

struct LipschitzSample {
  double f_ratio = 0.0;
  double g_inverse_ratio = 0.0;
};

// Largest difference quotients of f and g^{-1} over random pairs drawn
// uniformly from `box`.
LipschitzSample sample_lipschitz(const PlanningModel& model, const Box& box,
                                 int pairs, std::uint64_t seed);

// Summary of a tracking certificate: the tube bound e(u) = e0 + L_e ||u||
// and the Lipschitz constants of Pi, Psi and the tracker k.
struct TrackingCertificate {
  double e0 = 0.0;
  double lipschitz_e = 0.0;
  double lipschitz_pi = 1.0;
  double lipschitz_psi = 1.0;
  double lipschitz_k = 0.0;
  // ||k(Psi(x), x, 0)||; zero when unset.
  std::function<double(const Eigen::VectorXd&)> k_ref_norm;

  double error_bound(double u_norm) const { return e0 + lipschitz_e * u_norm; }
  double k_reference(const Eigen::VectorXd& x_ref) const;
  // Constant term of the input bound at x_ref: ||k(Psi(x), x, 0)|| + L_k e0.
  double input_offset(const Eigen::VectorXd& x_ref) const;
  bool admits(double u_max) const { return u_max - e0 > 0.0; }
  void validate() const;
};

// k(x, x_d, u_d) = u_d - sum_r K_r (q^(r) - q_d^(r)), r < gamma.
struct PdTracker {
  Eigen::VectorXd gains;  // K_0 .. K_(gamma-1)

  // Gains of (s + 1)^gamma: critically damped at unit natural frequency.
  static PdTracker critically_damped(int gamma, double natural_frequency = 1.0);

  Eigen::VectorXd input(const Eigen::VectorXd& x, const Eigen::VectorXd& x_d,
                        const Eigen::VectorXd& u_d, int m) const;
  // Infinity-norm Lipschitz constant of k in the sense of the input bound:
  // ||k - k_ref|| <= L_k (||x - Psi(x_d)|| + ||x_d - x_ref|| + ||u_d||).
  double lipschitz() const;
  TrackingCertificate certificate(double e0, double lipschitz_e) const;
};

struct ConstraintSet {
  Eigen::MatrixXd C;
  Eigen::VectorXd d;
  double u_max = 1.0;
  Eigen::VectorXd W;  // diagonal input weights; empty means identity

  Polytope state_polytope() const { return Polytope(C, d); }
  // u_max / max_i W_ii: a bound on ||u|| that implies ||W u|| <= u_max.
  double effective_u_max() const;
  double input_norm(const Eigen::VectorXd& u) const;  // ||W u||_inf
  // Throws DomainError unless dimensions agree, u_max > 0, W > 0 and
  // {C x <= d} is nonempty and bounded.
  void validate(int n, int m) const;

  static ConstraintSet box(const Eigen::VectorXd& lower,
                           const Eigen::VectorXd& upper, double u_max);
};

}  // namespace bezreach
