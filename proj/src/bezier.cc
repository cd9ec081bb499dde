#include "bezreach/bezier.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "bezreach/errors.h"
#include "bezreach/simd/kernels.h"

namespace bezreach {
namespace {

void check_order(int order) {
  if (order < 1 || order > kMaxOrder) {
    throw DomainError("curve order " + std::to_string(order) +
                      " outside supported range [1, " +
                      std::to_string(kMaxOrder) + "]");
  }
}

void check_duration(double duration) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw DomainError("curve duration must be positive and finite, got " +
                      std::to_string(duration));
  }
}

// Accepts round-off overshoot of the interval ends and clamps it away.
double normalized_time(double duration, double t) {
  const double slack = 1e-12 * duration;
  if (!(t >= -slack && t <= duration + slack)) {
    throw DomainError("time " + std::to_string(t) + " outside [0, " +
                      std::to_string(duration) + "]");
  }
  return std::clamp(t / duration, 0.0, 1.0);
}

const std::vector<std::vector<double>>& binomial_table() {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> rows(kMaxOrder + 1);
    for (int p = 0; p <= kMaxOrder; ++p) {
      rows[p].assign(p + 1, 1.0);
      for (int k = 1; k < p; ++k) rows[p][k] = rows[p - 1][k - 1] + rows[p - 1][k];
    }
    return rows;
  }();
  return table;
}

}  // namespace

Eigen::VectorXd bernstein_basis(int order, double duration, double t) {
  check_order(order);
  check_duration(duration);
  const double s = normalized_time(duration, t);
  const auto& binom = binomial_table()[order];
  Eigen::VectorXd z(order + 1);
  for (int k = 0; k <= order; ++k) {
    z(k) = binom[k] * std::pow(s, k) * std::pow(1.0 - s, order - k);
  }
  return z;
}

BezierCurve::BezierCurve(Eigen::MatrixXd points, double duration)
    : points_(std::move(points)), duration_(duration) {
  check_order(static_cast<int>(points_.cols()) - 1);
  check_duration(duration_);
  if (points_.rows() < 1) throw DomainError("curve has no output dimensions");
  if (!points_.allFinite()) throw DomainError("non-finite control point");
}

Eigen::VectorXd BezierCurve::eval(double t) const {
  return points_ * bernstein_basis(order(), duration_, t);
}

Eigen::MatrixXd BezierCurve::eval_many(const Eigen::VectorXd& times) const {
  Eigen::VectorXd tau(times.size());
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    tau(i) = normalized_time(duration_, times(i));
  }
  const auto& k = simd::kernels();
  Eigen::MatrixXd out(dim(), times.size());
  Eigen::VectorXd row(order() + 1);
  Eigen::VectorXd values(times.size());
  for (int r = 0; r < dim(); ++r) {
    row = points_.row(r).transpose();
    k.decasteljau(row.data(), order(), tau.data(), tau.size(), values.data());
    out.row(r) = values.transpose();
  }
  return out;
}

BezierCurve BezierCurve::derivative() const {
  return BezierCurve(points_ * derivative_map(order(), duration_), duration_);
}

Eigen::MatrixXd diff_matrix(int order, double duration) {
  if (order == 0) throw DomainError("order-0 curve has no derivative matrix");
  check_order(order);
  check_duration(duration);
  const double scale = order / duration;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(order + 1, order);
  for (int k = 0; k < order; ++k) {
    S(k, k) = -scale;
    S(k + 1, k) = scale;
  }
  return S;
}

Eigen::MatrixXd elevation_matrix(int order) {
  check_order(order);
  const double p = order;
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(order, order + 1);
  for (int i = 0; i <= order; ++i) {
    if (i < order) E(i, i) = (p - i) / p;
    if (i > 0) E(i - 1, i) = i / p;
  }
  return E;
}

Eigen::MatrixXd derivative_map(int order, double duration) {
  return diff_matrix(order, duration) * elevation_matrix(order);
}

std::vector<Eigen::MatrixXd> split_matrices(int order, int segments) {
  check_order(order);
  if (segments < 1) {
    throw DomainError("segment count must be at least 1, got " +
                      std::to_string(segments));
  }
  // Column j of Q_i is the blossom of the curve evaluated at (p-j) copies of
  // the segment start and j copies of the segment end.
  std::vector<Eigen::MatrixXd> Q;
  Q.reserve(segments);
  for (int i = 0; i < segments; ++i) {
    const double a = static_cast<double>(i) / segments;
    const double b = static_cast<double>(i + 1) / segments;
    Eigen::MatrixXd Qi(order + 1, order + 1);
    for (int j = 0; j <= order; ++j) {
      Eigen::MatrixXd w = Eigen::MatrixXd::Identity(order + 1, order + 1);
      for (int level = 0; level < order; ++level) {
        const double u = level < order - j ? a : b;
        const int rows = order - level;
        for (int r = 0; r < rows; ++r) {
          w.row(r) = (1.0 - u) * w.row(r) + u * w.row(r + 1);
        }
      }
      Qi.col(j) = w.row(0).transpose();
    }
    Q.push_back(std::move(Qi));
  }
  return Q;
}

Eigen::MatrixXd state_curve_matrix(const Eigen::MatrixXd& points, int gamma,
                                   double duration) {
  if (gamma < 1) throw DomainError("gamma must be at least 1");
  const int order = static_cast<int>(points.cols()) - 1;
  const Eigen::MatrixXd H = derivative_map(order, duration);
  const Eigen::Index m = points.rows();
  Eigen::MatrixXd P(gamma * m, order + 1);
  Eigen::MatrixXd block = points;
  for (int k = 0; k < gamma; ++k) {
    P.middleRows(k * m, m) = block;
    block = block * H;
  }
  return P;
}

Eigen::MatrixXd boundary_matrix(int order, int gamma, double duration) {
  if (gamma < 1) throw DomainError("gamma must be at least 1");
  if (order < 2 * gamma - 1) throw InsufficientOrderError(order, gamma);
  check_order(order);
  check_duration(duration);
  const Eigen::MatrixXd H = derivative_map(order, duration);
  Eigen::MatrixXd D(order + 1, 2 * gamma);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(order + 1, order + 1);
  for (int k = 0; k < gamma; ++k) {
    D.col(k) = power.col(0);
    D.col(gamma + k) = power.col(order);
    power = power * H;
  }
  return D;
}

Eigen::MatrixXd boundary_inverse(const Eigen::MatrixXd& D,
                                 const std::optional<Eigen::MatrixXd>& regularizer) {
  const int order = static_cast<int>(D.rows()) - 1;
  const int gamma = static_cast<int>(D.cols()) / 2;
  if (D.cols() % 2 != 0) {
    throw StructuralError("boundary matrix must have an even column count");
  }
  if (D.cols() > D.rows()) throw InsufficientOrderError(order, gamma);
  if (!regularizer) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(D);
    if (cod.rank() < D.cols()) throw InsufficientOrderError(order, gamma);
    return cod.pseudoInverse();
  }
  const Eigen::MatrixXd& Qc = *regularizer;
  if (Qc.rows() != D.rows() || Qc.cols() != D.rows()) {
    throw StructuralError("regularizer must be (p+1) x (p+1)");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Qc);
  if (llt.info() != Eigen::Success) {
    throw DomainError("regularizer is not positive definite");
  }
  const Eigen::MatrixXd QinvD = llt.solve(D);
  const Eigen::MatrixXd gram = D.transpose() * QinvD;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  if (!lu.isInvertible()) throw InsufficientOrderError(order, gamma);
  return lu.solve(QinvD.transpose());
}

Eigen::MatrixXd min_energy_boundary_inverse(int order, int gamma,
                                            double duration) {
  const Eigen::MatrixXd D = boundary_matrix(order, gamma, duration);
  const Eigen::MatrixXd H = derivative_map(order, duration);
  Eigen::MatrixXd Hg = Eigen::MatrixXd::Identity(order + 1, order + 1);
  for (int k = 0; k < gamma; ++k) Hg = Hg * H;
  // KKT system of min r Hg Hg^T r^T s.t. r D = x, one output row r at a time.
  const int N = order + 1;
  const int c = 2 * gamma;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N + c, N + c);
  K.topLeftCorner(N, N) = Hg * Hg.transpose();
  K.topRightCorner(N, c) = D;
  K.bottomLeftCorner(c, N) = D.transpose();
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(N + c, c);
  rhs.bottomRows(c).setIdentity();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) throw InsufficientOrderError(order, gamma);
  return lu.solve(rhs).topRows(N).transpose();
}

Eigen::MatrixXd solve_boundary(const Eigen::MatrixXd& D,
                               const Eigen::VectorXd& x0,
                               const Eigen::VectorXd& xT,
                               const std::optional<Eigen::MatrixXd>& regularizer) {
  const Eigen::Index gamma = D.cols() / 2;
  if (gamma == 0 || x0.size() != xT.size() || x0.size() % gamma != 0) {
    throw StructuralError("boundary states do not match the boundary matrix");
  }
  const Eigen::Index m = x0.size() / gamma;
  Eigen::MatrixXd X(m, 2 * gamma);
  for (Eigen::Index k = 0; k < gamma; ++k) {
    X.col(k) = x0.segment(k * m, m);
    X.col(gamma + k) = xT.segment(k * m, m);
  }
  return X * boundary_inverse(D, regularizer);
}

Eigen::MatrixXd commutation_matrix(int rows, int cols) {
  // vec(A)[j*rows + i] = A(i, j) = vec(A^T)[i*cols + j]
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(rows * cols, rows * cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) K(j * rows + i, i * cols + j) = 1.0;
  }
  return K;
}

VectorizationMaps vectorization_maps(int order, int gamma, int m,
                                     double duration) {
  if (m < 1) throw DomainError("output dimension must be at least 1");
  const Eigen::MatrixXd D = boundary_matrix(order, gamma, duration);
  const Eigen::MatrixXd H = derivative_map(order, duration);
  const int n = gamma * m;
  const int cols = m * (order + 1);

  VectorizationMaps maps;
  maps.order = order;
  maps.gamma = gamma;
  maps.m = m;
  maps.duration = duration;
  maps.H_vec = Eigen::MatrixXd::Zero(n * (order + 1), cols);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(order + 1, order + 1);
  for (int k = 0; k < gamma; ++k) {
    for (int j = 0; j <= order; ++j) {
      for (int l = 0; l <= order; ++l) {
        for (int r = 0; r < m; ++r) {
          maps.H_vec(j * n + k * m + r, l * m + r) = power(l, j);
        }
      }
    }
    power = power * H;
  }
  maps.D_vec = Eigen::MatrixXd::Zero(2 * n, cols);
  for (int c = 0; c < 2 * gamma; ++c) {
    for (int l = 0; l <= order; ++l) {
      for (int r = 0; r < m; ++r) maps.D_vec(c * m + r, l * m + r) = D(l, c);
    }
  }
  maps.K_comm = commutation_matrix(gamma, order + 1);
  return maps;
}

}  // namespace bezreach
