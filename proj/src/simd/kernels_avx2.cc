// AVX2 variants. This translation unit is compiled with -mavx2 (and without
// -mfma); nothing here may run before the dispatcher has checked CPU support.

#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "bezreach/simd/kernels.h"

namespace bezreach::simd {
namespace {

// Rows are processed four at a time; each lane accumulates over columns in
// the same order as the scalar loop.
void matvec_avx2(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                 std::ptrdiff_t cols, const double* x, double* y) {
  std::ptrdiff_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      const __m256d col = _mm256_loadu_pd(a + i + j * lda);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[j])));
    }
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < rows; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) acc += a[i + j * lda] * x[j];
    y[i] = acc;
  }
}

double hmax(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
}

double hmin(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
}

double max_residual_avx2(const double* a, std::ptrdiff_t lda,
                         std::ptrdiff_t rows, std::ptrdiff_t cols,
                         const double* x, const double* b) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  __m256d worst4 = _mm256_set1_pd(kNegInf);
  std::ptrdiff_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      const __m256d col = _mm256_loadu_pd(a + i + j * lda);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[j])));
    }
    worst4 = _mm256_max_pd(_mm256_sub_pd(acc, _mm256_loadu_pd(b + i)), worst4);
  }
  double worst = hmax(worst4);
  for (; i < rows; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < cols; ++j) acc += a[i + j * lda] * x[j];
    worst = std::max(worst, acc - b[i]);
  }
  return worst;
}

void chord_avx2(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                std::ptrdiff_t cols, const double* x, const double* dir,
                const double* b, double eps, double* lo, double* hi) {
  __m256d lo4 = _mm256_set1_pd(*lo);
  __m256d hi4 = _mm256_set1_pd(*hi);
  const __m256d pos_eps = _mm256_set1_pd(eps);
  const __m256d neg_eps = _mm256_set1_pd(-eps);
  std::ptrdiff_t i = 0;
  for (; i + 4 <= rows; i += 4) {
    __m256d ax = _mm256_setzero_pd();
    __m256d ad = _mm256_setzero_pd();
    for (std::ptrdiff_t j = 0; j < cols; ++j) {
      const __m256d col = _mm256_loadu_pd(a + i + j * lda);
      ax = _mm256_add_pd(ax, _mm256_mul_pd(col, _mm256_set1_pd(x[j])));
      ad = _mm256_add_pd(ad, _mm256_mul_pd(col, _mm256_set1_pd(dir[j])));
    }
    const __m256d ratio =
        _mm256_div_pd(_mm256_sub_pd(_mm256_loadu_pd(b + i), ax), ad);
    const __m256d up = _mm256_cmp_pd(ad, pos_eps, _CMP_GT_OQ);
    const __m256d down = _mm256_cmp_pd(ad, neg_eps, _CMP_LT_OQ);
    hi4 = _mm256_blendv_pd(hi4, _mm256_min_pd(ratio, hi4), up);
    lo4 = _mm256_blendv_pd(lo4, _mm256_max_pd(ratio, lo4), down);
  }
  double l = hmax(lo4);
  double h = hmin(hi4);
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

void axpy_avx2(std::ptrdiff_t n, double alpha, const double* x, double* y) {
  const __m256d alpha4 = _mm256_set1_pd(alpha);
  std::ptrdiff_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(alpha4, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four evaluation times per lane group; the recurrence runs on registers
// holding the same control value broadcast across lanes.
void decasteljau_avx2(const double* pts, int order, const double* tau,
                      std::ptrdiff_t count, double* out) {
  __m256d work[64];
  const __m256d one = _mm256_set1_pd(1.0);
  std::ptrdiff_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d t = _mm256_loadu_pd(tau + i);
    const __m256d s = _mm256_sub_pd(one, t);
    for (int k = 0; k <= order; ++k) work[k] = _mm256_set1_pd(pts[k]);
    for (int level = order; level > 0; --level) {
      for (int k = 0; k < level; ++k) {
        work[k] = _mm256_add_pd(_mm256_mul_pd(s, work[k]),
                                _mm256_mul_pd(t, work[k + 1]));
      }
    }
    _mm256_storeu_pd(out + i, work[0]);
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
const KernelTable kAvx2Table = {Isa::kAvx2,      &matvec_avx2,
                                &max_residual_avx2, &chord_avx2,
                                &axpy_avx2,      &decasteljau_avx2};
}  // namespace detail

}  // namespace bezreach::simd
