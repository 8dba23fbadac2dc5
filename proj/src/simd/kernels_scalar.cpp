#include <algorithm>
#include <cmath>

#include "tables.hpp"

namespace wavecs::simd {
namespace {

using cplx = std::complex<double>;

void soft_threshold(const cplx* in, double thr, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = in[i].real();
    const double im = in[i].imag();
    const double mag = std::sqrt(re * re + im * im);
    const double scale = mag > thr ? 1.0 - thr / mag : 0.0;
    out[i] = cplx(re * scale, im * scale);
  }
}

void extrapolate(const double* cur, const double* prev, double beta, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = cur[i] + beta * (cur[i] - prev[i]);
}

double l1_norm(const cplx* z, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[i].real();
    const double im = z[i].imag();
    s += std::sqrt(re * re + im * im);
  }
  return s;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void correlate(const double* src, std::size_t n, const double* taps, std::size_t ntaps, double* dst) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ntaps; ++k) acc += taps[k] * src[i + k];
    dst[i] = acc;
  }
}

void weighted_row_sum(const double* const* rows, const double* taps, std::size_t ntaps, std::size_t n,
                      double* dst) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = 0.0;
  for (std::size_t k = 0; k < ntaps; ++k) {
    const double t = taps[k];
    const double* r = rows[k];
    for (std::size_t i = 0; i < n; ++i) dst[i] += t * r[i];
  }
}

void warp_row(const double* img, int w, int h, int y, const double* dx, const double* dy, double* out) {
  const double xmax = w - 1;
  const double ymax = h - 1;
  for (int x = 0; x < w; ++x) {
    const double xf = std::clamp(x + dx[x], 0.0, xmax);
    const double yf = std::clamp(y + dy[x], 0.0, ymax);
    const int x0 = std::min(static_cast<int>(std::floor(xf)), w - 2);
    const int y0 = std::min(static_cast<int>(std::floor(yf)), h - 2);
    const double fx = xf - x0;
    const double fy = yf - y0;
    const double* p = img + static_cast<std::size_t>(y0) * w + x0;
    const double top = (1.0 - fx) * p[0] + fx * p[1];
    const double bot = (1.0 - fx) * p[w] + fx * p[w + 1];
    out[x] = (1.0 - fy) * top + fy * bot;
  }
}

void sample_block(const double* block, std::size_t stride, std::size_t win, const double* wts, double* out) {
  for (std::size_t r = 0; r < win; ++r) {
    const double* a = block + r * stride;
    const double* b = a + stride;
    for (std::size_t c = 0; c < win; ++c) {
      out[r * win + c] = wts[0] * a[c] + wts[1] * a[c + 1] + wts[2] * b[c] + wts[3] * b[c + 1];
    }
  }
}

PatchSums lk_sums(const double* block, std::size_t stride, std::size_t win, const double* wts, const double* tmpl,
                  const double* gx, const double* gy) {
  PatchSums s;
  for (std::size_t r = 0; r < win; ++r) {
    const double* a = block + r * stride;
    const double* b = a + stride;
    for (std::size_t c = 0; c < win; ++c) {
      const std::size_t i = r * win + c;
      const double j = wts[0] * a[c] + wts[1] * a[c + 1] + wts[2] * b[c] + wts[3] * b[c + 1];
      const double d = tmpl[i] - j;
      s.bx += d * gx[i];
      s.by += d * gy[i];
      s.sq += d * d;
    }
  }
  return s;
}

}  // namespace

namespace detail {
const KernelTable kScalarTable{
    Isa::scalar, soft_threshold, extrapolate, l1_norm,      squared_distance,
    correlate,   weighted_row_sum, warp_row,  sample_block, lk_sums,
};
}  // namespace detail

}  // namespace wavecs::simd
