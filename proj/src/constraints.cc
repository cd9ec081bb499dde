#include "bezreach/constraints.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "bezreach/errors.h"

namespace bezreach {

double CertificatePolytope::scaled_violation(const Eigen::MatrixXd& points) const {
  const Eigen::VectorXd v = points.reshaped();
  if (v.size() != F.cols()) {
    throw StructuralError("control points do not match certificate shape");
  }
  double worst = -std::numeric_limits<double>::infinity();
  const Eigen::VectorXd residual = F * v - G;
  for (Eigen::Index i = 0; i < F.rows(); ++i) {
    worst = std::max(worst, residual(i) / std::max(1.0, F.row(i).norm()));
  }
  return worst;
}

MixedConstraintRow input_constraint_row(const TrackingCertificate& cert,
                                        const Eigen::VectorXd& x_ref,
                                        double u_max) {
  MixedConstraintRow row;
  row.a1 = Eigen::VectorXd::Zero(x_ref.size());
  row.a2 = cert.lipschitz_k * (1.0 + cert.lipschitz_psi);
  row.a3 = cert.lipschitz_k * (1.0 + cert.lipschitz_e);
  row.b = u_max - cert.input_offset(x_ref);
  const double margin = u_max - cert.e0 - cert.k_reference(x_ref);
  if (!(margin > 0.0) || !(row.b > 0.0)) {
    throw InfeasibleCertificateError(-std::min(margin, row.b));
  }
  return row;
}

std::vector<MixedConstraintRow> state_constraint_rows(
    const ConstraintSet& cs, const TrackingCertificate& cert) {
  std::vector<MixedConstraintRow> rows;
  rows.reserve(cs.C.rows());
  for (Eigen::Index i = 0; i < cs.C.rows(); ++i) {
    // Support function of the infinity-norm ball: the dual (1-) norm.
    const double K = cs.C.row(i).lpNorm<1>();
    MixedConstraintRow row;
    row.a1 = cs.C.row(i).transpose();
    row.a2 = 0.0;
    row.a3 = cert.lipschitz_pi * cert.lipschitz_e * K;
    row.b = cs.d(i) - cert.lipschitz_pi * cert.e0 * K;
    if (!std::isfinite(row.b) || !std::isfinite(row.a3)) {
      throw NumericalError("state constraint row " + std::to_string(i) +
                           " has a non-finite tightened bound");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SigmaBox sigma_box_for(const PlanningModel& model, const Box& state_box,
                       const Eigen::VectorXd& x_ref, double input_bound) {
  SigmaBox sigma;
  for (Eigen::Index i = 0; i < x_ref.size(); ++i) {
    sigma.x_radius = std::max({sigma.x_radius, state_box.upper(i) - x_ref(i),
                               x_ref(i) - state_box.lower(i)});
  }
  sigma.q_radius = model.lipschitz().f * sigma.x_radius +
                   model.lipschitz().g_bound * input_bound;
  return sigma;
}

namespace {

Eigen::Matrix2d psd_projection(const Eigen::Matrix2d& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig;
  eig.computeDirect(M);
  const Eigen::Vector2d lambda = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * lambda.asDiagonal() *
         eig.eigenvectors().transpose();
}

// Vertices of {s in [0, s1] x [0, s2] : alpha s_1 + beta s_2 <= r}.
std::vector<Eigen::Vector2d> clipped_box_vertices(double s1, double s2,
                                                  double alpha, double beta,
                                                  double r) {
  std::vector<Eigen::Vector2d> out;
  const double tol = 1e-12 * (1.0 + std::abs(r) + std::abs(alpha) * s1 +
                              std::abs(beta) * s2);
  auto inside = [&](double x, double y) { return alpha * x + beta * y <= r + tol; };
  for (double x : {0.0, s1}) {
    for (double y : {0.0, s2}) {
      if (inside(x, y)) out.emplace_back(x, y);
    }
  }
  auto edge_point = [&](double x, double y) {
    if (x >= -tol && x <= s1 + tol && y >= -tol && y <= s2 + tol) {
      out.emplace_back(std::clamp(x, 0.0, s1), std::clamp(y, 0.0, s2));
    }
  };
  if (beta != 0.0) {
    edge_point(0.0, r / beta);
    edge_point(s1, (r - alpha * s1) / beta);
  }
  if (alpha != 0.0) {
    edge_point(r / alpha, 0.0);
    edge_point((r - beta * s2) / alpha, s2);
  }
  return out;
}

}  // namespace

LiftedLinearConstraints lemma3_reduce(const std::vector<MixedConstraintRow>& rows,
                                      const PlanningModel& model,
                                      const Eigen::VectorXd& x_ref,
                                      const SigmaBox& sigma) {
  const int n = model.n();
  const int m = model.m();
  if (x_ref.size() != n) throw StructuralError("reference has wrong dimension");
  if (!(sigma.x_radius >= 0) || !(sigma.q_radius >= 0) ||
      !std::isfinite(sigma.x_radius) || !std::isfinite(sigma.q_radius)) {
    throw DomainError("sigma box must be finite and nonnegative");
  }
  const double Lf = model.lipschitz().f;
  const double LG = model.lipschitz().g_inverse;
  const double G0 =
      model.actuation_inverse(x_ref).cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::VectorXd f_ref = model.drift(x_ref);
  const Eigen::Vector2d smax(sigma.x_radius, sigma.q_radius);

  LiftedLinearConstraints out;
  out.reference = x_ref;
  out.sigma = sigma;
  std::vector<Eigen::RowVectorXd> L_rows;
  std::vector<double> h_rows;
  auto push_unique = [&](const Eigen::RowVectorXd& row, double h) {
    for (size_t k = 0; k < L_rows.size(); ++k) {
      if (h_rows[k] == h && L_rows[k] == row) return;
    }
    L_rows.push_back(row);
    h_rows.push_back(h);
  };

  for (size_t idx = 0; idx < rows.size(); ++idx) {
    const MixedConstraintRow& row = rows[idx];
    if (row.a1.size() != n) {
      throw StructuralError("mixed constraint row has wrong state dimension");
    }
    if (row.a2 < 0 || row.a3 < 0) {
      throw DomainError("mixed constraint norm coefficients must be >= 0");
    }
    Eigen::Matrix2d M;
    M << 2 * LG * Lf, LG, LG, 0.0;
    M *= row.a3 / 2;
    const Eigen::Vector2d N(row.a3 * Lf * G0 + row.a2, row.a3 * G0);
    const Eigen::Matrix2d Mhat = psd_projection(M);
    const Eigen::Vector2d c = (N + Mhat * smax).cwiseMax(0.0);

    const double a1_norm = row.a1.lpNorm<1>();
    const double a1_ref = row.a1.dot(x_ref);
    const double alpha = c(0) - a1_norm;
    const double beta = c(1);
    auto psi = [&](const Eigen::Vector2d& s) {
      return s.dot(Mhat * s) + (N - c).dot(s);
    };
    // max over {l <= delta} of the quadratic bound, minus b; nondecreasing.
    auto excess = [&](double delta) {
      const auto verts =
          clipped_box_vertices(smax(0), smax(1), alpha, beta, delta - a1_ref);
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& v : verts) worst = std::max(worst, psi(v));
      return worst + delta - row.b;
    };

    const double delta_lo = a1_ref + std::min(0.0, alpha * smax(0)) +
                            std::min(0.0, beta * smax(1));
    const double delta_full = a1_ref + std::max(0.0, alpha * smax(0)) +
                              std::max(0.0, beta * smax(1));
    const double tol = 1e-9 * (1.0 + std::abs(row.b));
    if (excess(delta_lo) > tol) {
      throw InfeasibleReductionError(
          static_cast<int>(idx),
          "bound exceeded by " + std::to_string(excess(delta_lo)) +
              " at the smallest admissible level");
    }
    double delta;
    if (Mhat.isZero(0.0)) {
      // Linear in sigma: the level set is exact.
      delta = std::max(row.b, delta_lo);
    } else {
      double box_max = -std::numeric_limits<double>::infinity();
      for (double x : {0.0, smax(0)}) {
        for (double y : {0.0, smax(1)}) box_max = std::max(box_max, psi({x, y}));
      }
      const double cap = row.b - box_max;
      if (cap >= delta_full) {
        delta = cap;
      } else {
        double lo = delta_lo;
        double hi = delta_full;
        if (row.b > lo && row.b < hi && excess(row.b) <= 0.0) lo = row.b;
        for (int it = 0; it < 200 && hi - lo > 1e-9 * (1.0 + std::abs(lo)); ++it) {
          const double mid = 0.5 * (lo + hi);
          if (excess(mid) <= 0.0) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        delta = lo;
      }
    }
    out.directions.push_back(c);
    out.levels.push_back(delta);

    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        for (double s1 : {1.0, -1.0}) {
          for (double s2 : {1.0, -1.0}) {
            Eigen::RowVectorXd L = Eigen::RowVectorXd::Zero(n + m);
            L.head(n) = row.a1.transpose();
            L(i) += c(0) * s1;
            L(n + j) += c(1) * s2;
            push_unique(L, delta + c(0) * s1 * x_ref(i) + c(1) * s2 * f_ref(j));
          }
        }
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      Eigen::RowVectorXd L = Eigen::RowVectorXd::Zero(n + m);
      L(i) = s;
      push_unique(L, sigma.x_radius + s * x_ref(i));
    }
  }
  for (int j = 0; j < m; ++j) {
    for (double s : {1.0, -1.0}) {
      Eigen::RowVectorXd L = Eigen::RowVectorXd::Zero(n + m);
      L(n + j) = s;
      push_unique(L, sigma.q_radius + s * f_ref(j));
    }
  }

  out.L.resize(static_cast<Eigen::Index>(L_rows.size()), n + m);
  out.h.resize(static_cast<Eigen::Index>(h_rows.size()));
  for (size_t k = 0; k < L_rows.size(); ++k) {
    out.L.row(k) = L_rows[k];
    out.h(k) = h_rows[k];
  }
  return out;
}

CertificatePolytope theorem1_assemble(const LiftedLinearConstraints& lifted,
                                      int order, double duration,
                                      const VectorizationMaps& maps) {
  const int m = maps.m;
  const int gamma = maps.gamma;
  const int n = gamma * m;
  if (maps.order != order || maps.duration != duration) {
    throw StructuralError("vectorization maps built for a different curve");
  }
  if (order < gamma) {
    throw InsufficientOrderError(order, gamma);
  }
  if (lifted.L.cols() != n + m || lifted.L.rows() != lifted.h.size()) {
    throw StructuralError("lifted constraints have " +
                          std::to_string(lifted.L.cols()) +
                          " columns, expected n + m = " + std::to_string(n + m));
  }
  const Eigen::MatrixXd H = derivative_map(order, duration);
  Eigen::MatrixXd Hg = Eigen::MatrixXd::Identity(order + 1, order + 1);
  for (int k = 0; k < gamma; ++k) Hg = Hg * H;

  const Eigen::Index rows = lifted.L.rows();
  const Eigen::Index cols = m * (order + 1);
  CertificatePolytope out;
  out.order = order;
  out.gamma = gamma;
  out.m = m;
  out.duration = duration;
  out.segments = 1;
  out.references = {lifted.reference};
  out.F.resize(rows * (order + 1), cols);
  out.G.resize(rows * (order + 1));
  Eigen::MatrixXd Qj(m, cols);
  for (int j = 0; j <= order; ++j) {
    Qj.setZero();
    for (int l = 0; l <= order; ++l) {
      for (int r = 0; r < m; ++r) Qj(r, l * m + r) = Hg(l, j);
    }
    out.F.middleRows(j * rows, rows) =
        lifted.L.leftCols(n) * maps.H_vec.middleRows(j * n, n) +
        lifted.L.rightCols(m) * Qj;
    out.G.segment(j * rows, rows) = lifted.h;
  }
  return out;
}

CertificatePolytope corollary1_refine(
    const std::vector<LiftedLinearConstraints>& segments, int order,
    double duration, const std::vector<Eigen::MatrixXd>& split,
    const VectorizationMaps& segment_maps) {
  const int k = static_cast<int>(segments.size());
  if (k < 1) throw DomainError("refinement needs at least one segment");
  if (static_cast<int>(split.size()) != k) {
    throw StructuralError("one split matrix is needed per segment");
  }
  const double seg_duration = duration / k;
  std::vector<CertificatePolytope> parts;
  parts.reserve(k);
  Eigen::Index total_rows = 0;
  for (int i = 0; i < k; ++i) {
    parts.push_back(
        theorem1_assemble(segments[i], order, seg_duration, segment_maps));
    total_rows += parts.back().F.rows();
  }
  if (k == 1) {
    parts[0].duration = duration;
    return std::move(parts[0]);
  }
  const int m = segment_maps.m;
  const Eigen::MatrixXd Im = Eigen::MatrixXd::Identity(m, m);
  CertificatePolytope out;
  out.order = order;
  out.gamma = segment_maps.gamma;
  out.m = m;
  out.duration = duration;
  out.segments = k;
  out.F.resize(total_rows, m * (order + 1));
  out.G.resize(total_rows);
  Eigen::Index offset = 0;
  for (int i = 0; i < k; ++i) {
    const Eigen::MatrixXd Qvec = Eigen::kroneckerProduct(split[i].transpose(), Im);
    const Eigen::Index r = parts[i].F.rows();
    out.F.middleRows(offset, r) = parts[i].F * Qvec;
    out.G.segment(offset, r) = parts[i].G;
    out.references.push_back(segments[i].reference);
    offset += r;
  }
  return out;
}

CertificateSynthesizer::CertificateSynthesizer(PlanningModel model,
                                               TrackingCertificate cert,
                                               ConstraintSet cs, int order,
                                               double duration, int segments)
    : model_(std::move(model)),
      cert_(std::move(cert)),
      cs_(std::move(cs)),
      order_(order),
      duration_(duration),
      segments_(segments) {
  cert_.validate();
  cs_.validate(model_.n(), model_.m());
  if (order_ < model_.gamma()) {
    throw InsufficientOrderError(order_, model_.gamma());
  }
  if (segments_ < 1) throw DomainError("refinement needs at least one segment");
  state_box_ = *bounding_box(cs_.state_polytope());
  state_rows_ = state_constraint_rows(cs_, cert_);
  split_ = split_matrices(order_, segments_);
  segment_maps_ = vectorization_maps(order_, model_.gamma(), model_.m(),
                                     duration_ / segments_);
}

std::vector<MixedConstraintRow> CertificateSynthesizer::mixed_rows(
    const Eigen::VectorXd& x_ref) const {
  std::vector<MixedConstraintRow> rows;
  rows.reserve(state_rows_.size() + 1);
  rows.push_back(input_constraint_row(cert_, x_ref, cs_.effective_u_max()));
  rows.insert(rows.end(), state_rows_.begin(), state_rows_.end());
  return rows;
}

LiftedLinearConstraints CertificateSynthesizer::lift(
    const Eigen::VectorXd& x_ref) const {
  const auto rows = mixed_rows(x_ref);
  const MixedConstraintRow& input = rows.front();
  const double input_bound =
      input.a3 > 0 ? input.b / input.a3 : cs_.effective_u_max();
  const SigmaBox sigma = sigma_box_for(model_, state_box_, x_ref, input_bound);
  return lemma3_reduce(rows, model_, x_ref, sigma);
}

CertificatePolytope CertificateSynthesizer::synthesize(
    const std::vector<Eigen::VectorXd>& refs) const {
  if (static_cast<int>(refs.size()) != segments_) {
    throw StructuralError("expected " + std::to_string(segments_) +
                          " reference points, got " +
                          std::to_string(refs.size()));
  }
  std::vector<LiftedLinearConstraints> lifted;
  lifted.reserve(refs.size());
  for (const auto& ref : refs) lifted.push_back(lift(ref));
  return corollary1_refine(lifted, order_, duration_, split_, segment_maps_);
}

}  // namespace bezreach
