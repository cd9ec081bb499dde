// NEON variants for aarch64 (two double lanes). Advanced SIMD is mandatory on
// aarch64, so no runtime feature check is needed beyond the build target.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <limits>

#include "bezreach/simd/kernels.h"

namespace bezreach::simd {
namespace {

void matvec_neon(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                 std::ptrdiff_t cols, const double* x, double* y) {
  std::ptrdiff_t i = 0;
  for (; i + 2 <= rows; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i + j * lda),
                                     vdupq_n_f64(x[j])));
    }
    vst1q_f64(y + i, acc);
  }
  for (; i < rows; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) acc += a[i + j * lda] * x[j];
    y[i] = acc;
  }
}

double max_residual_neon(const double* a, std::ptrdiff_t lda,
                         std::ptrdiff_t rows, std::ptrdiff_t cols,
                         const double* x, const double* b) {
  double worst = -std::numeric_limits<double>::infinity();
  std::ptrdiff_t i = 0;
  for (; i + 2 <= rows; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i + j * lda),
                                     vdupq_n_f64(x[j])));
    }
    const float64x2_t r = vsubq_f64(acc, vld1q_f64(b + i));
    worst = std::max(worst, std::max(vgetq_lane_f64(r, 0),
                                     vgetq_lane_f64(r, 1)));
  }
  for (; i < rows; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) acc += a[i + j * lda] * x[j];
    worst = std::max(worst, acc - b[i]);
  }
  return worst;
}

void chord_neon(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                std::ptrdiff_t cols, const double* x, const double* dir,
                const double* b, double eps, double* lo, double* hi) {
  double l = *lo;
  double h = *hi;
  std::ptrdiff_t i = 0;
  for (; i + 2 <= rows; i += 2) {
    float64x2_t ax = vdupq_n_f64(0.0);
    float64x2_t ad = vdupq_n_f64(0.0);
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      const float64x2_t col = vld1q_f64(a + i + j * lda);
      ax = vaddq_f64(ax, vmulq_f64(col, vdupq_n_f64(x[j])));
      ad = vaddq_f64(ad, vmulq_f64(col, vdupq_n_f64(dir[j])));
    }
    const float64x2_t ratio = vdivq_f64(vsubq_f64(vld1q_f64(b + i), ax), ad);
    for (int lane = 0; lane < 2; ++lane) {
      const double d = lane == 0 ? vgetq_lane_f64(ad, 0) : vgetq_lane_f64(ad, 1);
      const double r =
          lane == 0 ? vgetq_lane_f64(ratio, 0) : vgetq_lane_f64(ratio, 1);
      if (d > eps) h = std::min(h, r);
      if (d < -eps) l = std::max(l, r);
    }
  }
  for (; i < rows; ++i) {
    double axs = 0.0;
    double ads = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      axs += a[i + j * lda] * x[j];
      ads += a[i + j * lda] * dir[j];
    }
    const double ratio = (b[i] - axs) / ads;
    if (ads > eps) h = std::min(h, ratio);
    if (ads < -eps) l = std::max(l, ratio);
  }
  *lo = l;
  *hi = h;
}

void axpy_neon(std::ptrdiff_t n, double alpha, const double* x, double* y) {
  const float64x2_t alpha2 = vdupq_n_f64(alpha);
  std::ptrdiff_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i,
              vaddq_f64(vld1q_f64(y + i), vmulq_f64(alpha2, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void decasteljau_neon(const double* pts, int order, const double* tau,
                      std::ptrdiff_t count, double* out) {
  float64x2_t work[64];
  const float64x2_t one = vdupq_n_f64(1.0);
  std::ptrdiff_t i = 0;
  for (; i + 2 <= count; i += 2) {
    const float64x2_t t = vld1q_f64(tau + i);
    const float64x2_t s = vsubq_f64(one, t);
    for (int k = 0; k <= order; ++k) work[k] = vdupq_n_f64(pts[k]);
    for (int level = order; level > 0; --level) {
      for (int k = 0; k < level; ++k) {
        work[k] = vaddq_f64(vmulq_f64(s, work[k]), vmulq_f64(t, work[k + 1]));
      }
    }
    vst1q_f64(out + i, work[0]);
  }
  double tail[64];
  for (; i < count; ++i) {
    const double t = tau[i];
    const double s = 1.0 - t;
    for (int k = 0; k <= order; ++k) tail[k] = pts[k];
    for (int level = order; level > 0; --level) {
      for (int k = 0; k < level; ++k) tail[k] = s * tail[k] + t * tail[k + 1];
    }
    out[i] = tail[0];
  }
}

}  // namespace

namespace detail {
const KernelTable kNeonTable = {Isa::kNeon,      &matvec_neon,
                                &max_residual_neon, &chord_neon,
                                &axpy_neon,      &decasteljau_neon};
}  // namespace detail

}  // namespace bezreach::simd

#endif  // __aarch64__
