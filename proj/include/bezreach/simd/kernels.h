#pragma once

// Data-parallel inner loops shared by the polytope, sampling and curve code.
//
// Every kernel has a portable scalar reference implementation and, where the
// target supports it, an AVX2 (x86-64) or NEON (aarch64) variant. Variants
// are selected once at runtime. All variants evaluate each output element
// with the same sequence of IEEE operations as the scalar reference, so the
// results are bit-identical (the build disables FMA contraction).
//
// Matrices are column-major with an explicit leading dimension, matching
// Eigen's default storage.

#include <cstddef>
#include <string_view>

namespace bezreach::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;

  // y = A x, A is rows x cols.
  void (*matvec)(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                 std::ptrdiff_t cols, const double* x, double* y);

  // max_i ((A x)_i - b_i); -inf when rows == 0.
  double (*max_residual)(const double* a, std::ptrdiff_t lda,
                         std::ptrdiff_t rows, std::ptrdiff_t cols,
                         const double* x, const double* b);

  // Intersects the line x + s*dir with {A x <= b}. On entry [*lo, *hi] is the
  // admissible parameter interval; on exit it is narrowed by every row whose
  // |(A dir)_i| exceeds eps.
  void (*chord)(const double* a, std::ptrdiff_t lda, std::ptrdiff_t rows,
                std::ptrdiff_t cols, const double* x, const double* dir,
                const double* b, double eps, double* lo, double* hi);

  // y += alpha x
  void (*axpy)(std::ptrdiff_t n, double alpha, const double* x, double* y);

  // Scalar Bezier curve with control values pts[0..order] evaluated at each
  // normalized time tau[i] in [0, 1] by de Casteljau's recurrence.
  void (*decasteljau)(const double* pts, int order, const double* tau,
                      std::ptrdiff_t count, double* out);
};

bool isa_available(Isa isa);
std::string_view isa_name(Isa isa);

// Kernel table for a specific ISA. Throws std::invalid_argument when the ISA
// is not available on this machine.
const KernelTable& kernels(Isa isa);

// Kernel table chosen at first use: the widest available ISA, unless the
// BEZREACH_SIMD environment variable names another one ("scalar", "avx2",
// "neon").
const KernelTable& kernels();

namespace detail {
extern const KernelTable kScalarTable;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Table;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonTable;
#endif
}  // namespace detail

}  // namespace bezreach::simd
