#include "bezreach/simd/kernels.h"

#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace bezreach::simd {
namespace {

std::vector<Isa> wide_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (isa_available(isa)) out.push_back(isa);
  }
  return out;
}

std::vector<double> random_vector(std::mt19937_64& rng, size_t n) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Shapes chosen to hit every vector-width remainder.
const int kRows[] = {0, 1, 2, 3, 4, 5, 7, 8, 13, 64, 101};
const int kCols[] = {1, 2, 3, 5};

TEST(SimdTest, SelectionIsAvailable) {
  EXPECT_TRUE(isa_available(kernels().isa));
  EXPECT_TRUE(isa_available(Isa::kScalar));
  EXPECT_EQ(kernels(Isa::kScalar).isa, Isa::kScalar);
}

TEST(SimdTest, MatvecBitIdentical) {
  std::mt19937_64 rng(1);
  const auto& ref = kernels(Isa::kScalar);
  for (Isa isa : wide_isas()) {
    const auto& k = kernels(isa);
    for (int rows : kRows) {
      for (int cols : kCols) {
        const int lda = rows + 3;
        const auto a = random_vector(rng, lda * cols);
        const auto x = random_vector(rng, cols);
        std::vector<double> y0(rows), y1(rows);
        ref.matvec(a.data(), lda, rows, cols, x.data(), y0.data());
        k.matvec(a.data(), lda, rows, cols, x.data(), y1.data());
        EXPECT_EQ(y0, y1) << isa_name(isa) << " " << rows << "x" << cols;
      }
    }
  }
}

TEST(SimdTest, MaxResidualBitIdentical) {
  std::mt19937_64 rng(2);
  const auto& ref = kernels(Isa::kScalar);
  for (Isa isa : wide_isas()) {
    const auto& k = kernels(isa);
    for (int rows : kRows) {
      for (int cols : kCols) {
        const auto a = random_vector(rng, rows * cols);
        const auto x = random_vector(rng, cols);
        const auto b = random_vector(rng, rows);
        EXPECT_EQ(ref.max_residual(a.data(), rows, rows, cols, x.data(), b.data()),
                  k.max_residual(a.data(), rows, rows, cols, x.data(), b.data()));
      }
    }
  }
}

TEST(SimdTest, ChordBitIdentical) {
  std::mt19937_64 rng(3);
  const auto& ref = kernels(Isa::kScalar);
  for (Isa isa : wide_isas()) {
    const auto& k = kernels(isa);
    for (int rows : kRows) {
      for (int cols : kCols) {
        auto a = random_vector(rng, rows * cols);
        if (rows > 2) {
          // A row orthogonal to the direction must be skipped by both.
          for (int j = 0; j < cols; ++j) a[1 + j * rows] = 0.0;
        }
        const auto x = random_vector(rng, cols);
        const auto dir = random_vector(rng, cols);
        auto b = random_vector(rng, rows);
        for (double& v : b) v = std::abs(v) + 10.0;
        double lo0 = -1e9, hi0 = 1e9, lo1 = -1e9, hi1 = 1e9;
        ref.chord(a.data(), rows, rows, cols, x.data(), dir.data(), b.data(),
                  1e-12, &lo0, &hi0);
        k.chord(a.data(), rows, rows, cols, x.data(), dir.data(), b.data(),
                1e-12, &lo1, &hi1);
        EXPECT_EQ(lo0, lo1);
        EXPECT_EQ(hi0, hi1);
      }
    }
  }
}

TEST(SimdTest, AxpyBitIdentical) {
  std::mt19937_64 rng(4);
  const auto& ref = kernels(Isa::kScalar);
  for (Isa isa : wide_isas()) {
    const auto& k = kernels(isa);
    for (int n : {0, 1, 3, 4, 9, 32, 77}) {
      const auto x = random_vector(rng, n);
      auto y0 = random_vector(rng, n);
      auto y1 = y0;
      ref.axpy(n, -0.37, x.data(), y0.data());
      k.axpy(n, -0.37, x.data(), y1.data());
      EXPECT_EQ(y0, y1);
    }
  }
}

TEST(SimdTest, DecasteljauBitIdentical) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& ref = kernels(Isa::kScalar);
  for (Isa isa : wide_isas()) {
    const auto& k = kernels(isa);
    for (int order : {1, 2, 3, 7, 30}) {
      for (int count : {1, 3, 4, 6, 33}) {
        const auto pts = random_vector(rng, order + 1);
        std::vector<double> tau(count);
        for (double& t : tau) t = unit(rng);
        std::vector<double> out0(count), out1(count);
        ref.decasteljau(pts.data(), order, tau.data(), count, out0.data());
        k.decasteljau(pts.data(), order, tau.data(), count, out1.data());
        EXPECT_EQ(out0, out1);
      }
    }
  }
}

TEST(SimdTest, ScalarKernelsAreCorrect) {
  const auto& k = kernels(Isa::kScalar);
  const double a[] = {1, 3, 2, 4};  // [[1 2]; [3 4]] column-major
  const double x[] = {1, -1};
  double y[2];
  k.matvec(a, 2, 2, 2, x, y);
  EXPECT_EQ(y[0], -1.0);
  EXPECT_EQ(y[1], -1.0);
  const double pts[] = {0.0, 1.0, 0.0};
  const double tau[] = {0.5};
  double out;
  k.decasteljau(pts, 2, tau, 1, &out);
  EXPECT_EQ(out, 0.5);
}

}  // namespace
}  // namespace bezreach::simd
