#include <gtest/gtest.h>

#include <complex>
#include <random>
#include <vector>

#include "wavecs/simd/kernels.hpp"

using namespace wavecs;
using cplx = std::complex<double>;

namespace {

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    vec_ = simd::avx2_kernels();
    if (!vec_) GTEST_SKIP() << "AVX2 kernels unavailable on this machine";
  }
  std::vector<double> randoms(std::size_t n, double lo = -1, double hi = 1) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng_);
    return v;
  }
  const simd::KernelTable& ref_ = simd::scalar_kernels();
  const simd::KernelTable* vec_ = nullptr;
  std::mt19937_64 rng_{42};
};

// Odd lengths exercise the scalar tails of the vector loops.
constexpr std::size_t kLengths[] = {0, 1, 3, 4, 7, 8, 31, 64, 1001};

}  // namespace

TEST_F(SimdEquivalence, SoftThreshold) {
  for (std::size_t n : kLengths) {
    auto re = randoms(n), im = randoms(n);
    std::vector<cplx> in(n), a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = {re[i], im[i]};
    if (n > 2) in[1] = 0.0;  // zero magnitude must stay zero
    ref_.soft_threshold(in.data(), 0.4, a.data(), n);
    vec_->soft_threshold(in.data(), 0.4, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(a[i].real(), b[i].real(), 1e-14);
      EXPECT_NEAR(a[i].imag(), b[i].imag(), 1e-14);
    }
  }
}

TEST_F(SimdEquivalence, SoftThresholdInPlace) {
  std::vector<cplx> a(37), b;
  auto re = randoms(37);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = {re[i], -re[i]};
  b = a;
  ref_.soft_threshold(a.data(), 0.1, a.data(), a.size());
  vec_->soft_threshold(b.data(), 0.1, b.data(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(std::abs(a[i] - b[i]), 0.0, 1e-14);
}

TEST_F(SimdEquivalence, Reductions) {
  for (std::size_t n : kLengths) {
    auto x = randoms(2 * n), y = randoms(2 * n);
    const auto* z = reinterpret_cast<const cplx*>(x.data());
    EXPECT_NEAR(ref_.l1_norm(z, n), vec_->l1_norm(z, n), 1e-12 * (1 + n));
    EXPECT_NEAR(ref_.squared_distance(x.data(), y.data(), 2 * n), vec_->squared_distance(x.data(), y.data(), 2 * n),
                1e-12 * (1 + n));
  }
}

TEST_F(SimdEquivalence, Extrapolate) {
  for (std::size_t n : kLengths) {
    auto c = randoms(n), p = randoms(n);
    std::vector<double> a(n), b(n);
    ref_.extrapolate(c.data(), p.data(), 0.7, a.data(), n);
    vec_->extrapolate(c.data(), p.data(), 0.7, b.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
  }
}

TEST_F(SimdEquivalence, CorrelateAndRowSum) {
  for (std::size_t ntaps : {1u, 3u, 5u, 11u, 15u}) {
    for (std::size_t n : kLengths) {
      auto src = randoms(n + ntaps - 1), taps = randoms(ntaps);
      std::vector<double> a(n), b(n);
      ref_.correlate(src.data(), n, taps.data(), ntaps, a.data());
      vec_->correlate(src.data(), n, taps.data(), ntaps, b.data());
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-13);

      std::vector<std::vector<double>> rows(ntaps);
      std::vector<const double*> ptrs;
      for (auto& r : rows) {
        r = randoms(n);
        ptrs.push_back(r.data());
      }
      ref_.weighted_row_sum(ptrs.data(), taps.data(), ntaps, n, a.data());
      vec_->weighted_row_sum(ptrs.data(), taps.data(), ntaps, n, b.data());
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
    }
  }
}

TEST_F(SimdEquivalence, WarpRow) {
  const int w = 37, h = 19;
  auto img = randoms(static_cast<std::size_t>(w) * h, 0, 1);
  // Displacements reaching past every edge to exercise the clamping.
  auto dx = randoms(w, -45, 45), dy = randoms(w, -25, 25);
  dx[0] = 0.0;
  dy[0] = 0.0;
  std::vector<double> a(w), b(w);
  for (int y = 0; y < h; ++y) {
    ref_.warp_row(img.data(), w, h, y, dx.data(), dy.data(), a.data());
    vec_->warp_row(img.data(), w, h, y, dx.data(), dy.data(), b.data());
    for (int x = 0; x < w; ++x) EXPECT_NEAR(a[x], b[x], 1e-14) << x << "," << y;
  }
}

TEST_F(SimdEquivalence, PatchKernels) {
  for (std::size_t win : {3u, 7u, 31u}) {
    const std::size_t stride = win + 5;
    auto block = randoms(stride * (win + 1), 0, 1);
    auto tmpl = randoms(win * win, 0, 1), gx = randoms(win * win), gy = randoms(win * win);
    const double fx = 0.3, fy = 0.8;
    const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    std::vector<double> a(win * win), b(win * win);
    ref_.sample_block(block.data(), stride, win, wts, a.data());
    vec_->sample_block(block.data(), stride, win, wts, b.data());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
    const auto sa = ref_.lk_sums(block.data(), stride, win, wts, tmpl.data(), gx.data(), gy.data());
    const auto sb = vec_->lk_sums(block.data(), stride, win, wts, tmpl.data(), gx.data(), gy.data());
    EXPECT_NEAR(sa.bx, sb.bx, 1e-11);
    EXPECT_NEAR(sa.by, sb.by, 1e-11);
    EXPECT_NEAR(sa.sq, sb.sq, 1e-11);
  }
}

TEST(SimdDispatch, SelectedTableIsComplete) {
  const auto& k = simd::kernels();
  EXPECT_NE(k.soft_threshold, nullptr);
  EXPECT_NE(k.lk_sums, nullptr);
  EXPECT_FALSE(simd::isa_name(k.isa).empty());
}
