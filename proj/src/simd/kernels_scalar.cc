#include <algorithm>
#include <limits>

#include "bezreach/simd/kernels.h"

namespace bezreach::simd {
namespace {

void matvec_scalar(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                   std::ptrdiff_t cols, const double* x, double* y) {
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) acc += a[i + j * lda] * x[j];
    y[i] = acc;
  }
}

double max_residual_scalar(const double* a, std::ptrdiff_t lda,
                           std::ptrdiff_t rows, std::ptrdiff_t cols,
                           const double* x, const double* b) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) acc += a[i + j * lda] * x[j];
    worst = std::max(worst, acc - b[i]);
  }
  return worst;
}

void chord_scalar(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                  std::ptrdiff_t cols, const double* x, const double* dir,
                  const double* b, double eps, double* lo, double* hi) {
  double l = *lo;
  double h = *hi;
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double ax = 0.0;
    double ad = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      ax += a[i + j * lda] * x[j];
      ad += a[i + j * lda] * dir[j];
    }
    const double ratio = (b[i] - ax) / ad;
    if (ad > eps) h = std::min(h, ratio);
    if (ad < -eps) l = std::max(l, ratio);
  }
  *lo = l;
  *hi = h;
}

void axpy_scalar(std::ptrdiff_t n, double alpha, const double* x, double* y) {
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void decasteljau_scalar(const double* pts, int order, const double* tau,
                        std::ptrdiff_t count, double* out) {
  double work[64];
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const double t = tau[i];
    const double s = 1.0 - t;
    for (int k = 0; k <= order; ++k) work[k] = pts[k];
    for (int level = order; level > 0; --level) {
      for (int k = 0; k < level; ++k) work[k] = s * work[k] + t * work[k + 1];
    }
    out[i] = work[0];
  }
}

}  // namespace

namespace detail {
const KernelTable kScalarTable = {Isa::kScalar,      &matvec_scalar,
                                  &max_residual_scalar, &chord_scalar,
                                  &axpy_scalar,      &decasteljau_scalar};
}  // namespace detail

}  // namespace bezreach::simd
