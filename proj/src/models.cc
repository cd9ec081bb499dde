#include "bezreach/models.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "bezreach/errors.h"

namespace bezreach {

PlanningModel::PlanningModel(std::string name, int gamma, int m, Drift drift,
                             Actuation actuation, Lipschitz constants)
    : name_(std::move(name)),
      gamma_(gamma),
      m_(m),
      drift_(std::move(drift)),
      actuation_(std::move(actuation)),
      constants_(constants) {
  if (gamma_ < 1 || m_ < 1) {
    throw DomainError("planning model needs gamma >= 1 and m >= 1");
  }
  if (constants_.f < 0 || constants_.g_inverse < 0 || constants_.g_bound <= 0) {
    throw DomainError("planning model Lipschitz constants must be nonnegative");
  }
}

Eigen::VectorXd PlanningModel::drift(const Eigen::VectorXd& x) const {
  if (x.size() != n()) throw StructuralError("state has wrong dimension");
  return drift_(x);
}

Eigen::MatrixXd PlanningModel::actuation(const Eigen::VectorXd& x) const {
  if (x.size() != n()) throw StructuralError("state has wrong dimension");
  return actuation_(x);
}

Eigen::MatrixXd PlanningModel::actuation_inverse(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd g = actuation(x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  const double cond = smallest > 0 ? s(0) / smallest
                                   : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) throw SingularityError(cond);
  return g.inverse();
}

Eigen::VectorXd PlanningModel::dynamics(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& u) const {
  Eigen::VectorXd dx(n());
  const int tail = n() - m_;
  dx.head(tail) = x.tail(tail);
  dx.tail(m_) = drift(x) + actuation(x) * u;
  return dx;
}

PlanningModel pendulum_model(double mass, double length, double gravity,
                             double ripple) {
  if (!(mass > 0) || !(length > 0) || !(gravity >= 0)) {
    throw DomainError("pendulum mass and length must be positive");
  }
  if (!(ripple >= 0 && ripple < 1)) {
    throw DomainError("actuation ripple must lie in [0, 1)");
  }
  const double inertia = mass * length * length;
  const double g_over_l = gravity / length;
  PlanningModel::Lipschitz constants;
  constants.f = g_over_l;
  // d/dtheta of inertia / (1 + r sin) is bounded by inertia r / (1 - r)^2.
  constants.g_inverse = inertia * ripple / ((1 - ripple) * (1 - ripple));
  constants.g_bound = (1 + ripple) / inertia;
  return PlanningModel(
      "pendulum", 2, 1,
      [g_over_l](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, -g_over_l * std::sin(x(0)));
      },
      [inertia, ripple](const Eigen::VectorXd& x) {
        return Eigen::MatrixXd::Constant(
            1, 1, (1 + ripple * std::sin(x(0))) / inertia);
      },
      constants);
}

PlanningModel integrator_chain(int gamma, int m) {
  PlanningModel::Lipschitz constants;
  return PlanningModel(
      "integrator", gamma, m,
      [m](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(m); },
      [m](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(m, m); },
      constants);
}

Eigen::VectorXd flat_input(const PlanningModel& model, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& q_gamma) {
  if (q_gamma.size() != model.m()) {
    throw StructuralError("q^(gamma) has wrong dimension");
  }
  return model.actuation_inverse(x) * (q_gamma - model.drift(x));
}

LipschitzSample sample_lipschitz(const PlanningModel& model, const Box& box,
                                 int pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    Eigen::VectorXd x(model.n());
    for (int i = 0; i < model.n(); ++i) {
      x(i) = box.lower(i) + (box.upper(i) - box.lower(i)) * unit(rng);
    }
    return x;
  };
  LipschitzSample out;
  for (int k = 0; k < pairs; ++k) {
    const Eigen::VectorXd x = draw();
    const Eigen::VectorXd y = draw();
    const double dist = (x - y).lpNorm<Eigen::Infinity>();
    if (dist < 1e-12) continue;
    const double df = (model.drift(x) - model.drift(y)).lpNorm<Eigen::Infinity>();
    const Eigen::MatrixXd dg =
        model.actuation_inverse(x) - model.actuation_inverse(y);
    // Induced infinity norm: max absolute row sum.
    const double dg_norm = dg.cwiseAbs().rowwise().sum().maxCoeff();
    out.f_ratio = std::max(out.f_ratio, df / dist);
    out.g_inverse_ratio = std::max(out.g_inverse_ratio, dg_norm / dist);
  }
  return out;
}

double TrackingCertificate::k_reference(const Eigen::VectorXd& x_ref) const {
  return k_ref_norm ? k_ref_norm(x_ref) : 0.0;
}

double TrackingCertificate::input_offset(const Eigen::VectorXd& x_ref) const {
  return k_reference(x_ref) + lipschitz_k * e0;
}

void TrackingCertificate::validate() const {
  for (double v : {e0, lipschitz_e, lipschitz_pi, lipschitz_psi, lipschitz_k}) {
    if (!(v >= 0) || !std::isfinite(v)) {
      throw DomainError("tracking certificate constants must be finite and "
                        "nonnegative");
    }
  }
}

PdTracker PdTracker::critically_damped(int gamma, double natural_frequency) {
  if (gamma < 1 || !(natural_frequency > 0)) {
    throw DomainError("tracker needs gamma >= 1 and a positive frequency");
  }
  // Coefficients of (s + w)^gamma below the leading term.
  PdTracker tracker;
  tracker.gains.resize(gamma);
  double binom = 1.0;
  for (int r = 0; r < gamma; ++r) {
    tracker.gains(r) = binom * std::pow(natural_frequency, gamma - r);
    binom = binom * (gamma - r) / (r + 1);
  }
  return tracker;
}

Eigen::VectorXd PdTracker::input(const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& x_d,
                                 const Eigen::VectorXd& u_d, int m) const {
  Eigen::VectorXd u = u_d;
  for (int r = 0; r < gains.size(); ++r) {
    u -= gains(r) * (x.segment(r * m, m) - x_d.segment(r * m, m));
  }
  return u;
}

double PdTracker::lipschitz() const {
  return std::max(1.0, gains.cwiseAbs().sum());
}

TrackingCertificate PdTracker::certificate(double e0, double lipschitz_e) const {
  TrackingCertificate cert;
  cert.e0 = e0;
  cert.lipschitz_e = lipschitz_e;
  cert.lipschitz_k = lipschitz();
  cert.validate();
  return cert;
}

double ConstraintSet::effective_u_max() const {
  if (W.size() == 0) return u_max;
  return u_max / W.maxCoeff();
}

double ConstraintSet::input_norm(const Eigen::VectorXd& u) const {
  if (W.size() == 0) return u.lpNorm<Eigen::Infinity>();
  return W.cwiseProduct(u).lpNorm<Eigen::Infinity>();
}

void ConstraintSet::validate(int n, int m) const {
  if (C.cols() != n || C.rows() != d.size()) {
    throw DomainError("state constraint matrix must be k x " +
                      std::to_string(n) + " with k right-hand sides");
  }
  if (!(u_max > 0) || !std::isfinite(u_max)) {
    throw DomainError("u_max must be positive and finite");
  }
  if (W.size() != 0 && (W.size() != m || !(W.minCoeff() > 0))) {
    throw DomainError("input weights must be " + std::to_string(m) +
                      " positive entries");
  }
  const auto box = bounding_box(state_polytope());
  if (!box) throw DomainError("state constraint set is empty");
  if (!box->lower.allFinite() || !box->upper.allFinite()) {
    throw DomainError("state constraint set is unbounded");
  }
}

ConstraintSet ConstraintSet::box(const Eigen::VectorXd& lower,
                                 const Eigen::VectorXd& upper, double u_max) {
  const Eigen::Index n = lower.size();
  ConstraintSet cs;
  cs.C.resize(2 * n, n);
  cs.C << Eigen::MatrixXd::Identity(n, n), -Eigen::MatrixXd::Identity(n, n);
  cs.d.resize(2 * n);
  cs.d << upper, -lower;
  cs.u_max = u_max;
  return cs;
}

}  // namespace bezreach
