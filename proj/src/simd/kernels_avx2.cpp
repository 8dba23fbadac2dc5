// AVX2/FMA variants of the kernels in kernels_scalar.cpp. This file is the
// only one compiled with -mavx2 -mfma; nothing here may run before the
// dispatcher has confirmed CPU support.

#include "tables.hpp"

#if defined(WAVECS_HAVE_AVX2_TU)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace wavecs::simd {
namespace {

using cplx = std::complex<double>;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void soft_threshold(const cplx* in, double thr, cplx* out, std::size_t n) {
  const double* src = reinterpret_cast<const double*>(in);
  double* dst = reinterpret_cast<double*>(out);
  const __m256d vthr = _mm256_set1_pd(thr);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(src + 2 * i);
    const __m256d sq = _mm256_mul_pd(v, v);
    const __m256d mag = _mm256_sqrt_pd(_mm256_hadd_pd(sq, sq));
    // max_pd returns its second operand when the first is NaN (0/0 at thr = 0).
    const __m256d scale = _mm256_max_pd(_mm256_sub_pd(one, _mm256_div_pd(vthr, mag)), zero);
    _mm256_storeu_pd(dst + 2 * i, _mm256_mul_pd(v, scale));
  }
  for (; i < n; ++i) {
    const double re = in[i].real();
    const double im = in[i].imag();
    const double mag = std::sqrt(re * re + im * im);
    const double scale = mag > thr ? 1.0 - thr / mag : 0.0;
    out[i] = cplx(re * scale, im * scale);
  }
}

void extrapolate(const double* cur, const double* prev, double beta, double* out, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d c = _mm256_loadu_pd(cur + i);
    const __m256d p = _mm256_loadu_pd(prev + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(vb, _mm256_sub_pd(c, p), c));
  }
  for (; i < n; ++i) out[i] = cur[i] + beta * (cur[i] - prev[i]);
}

double l1_norm(const cplx* z, std::size_t n) {
  const double* src = reinterpret_cast<const double*>(z);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(src + 2 * i);
    const __m256d b = _mm256_loadu_pd(src + 2 * i + 4);
    const __m256d s = _mm256_hadd_pd(_mm256_mul_pd(a, a), _mm256_mul_pd(b, b));
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(s));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += std::abs(z[i]);
  return total;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

void correlate(const double* src, std::size_t n, const double* taps, std::size_t ntaps, double* dst) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < ntaps; ++k) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(src + i + k), acc);
    }
    _mm256_storeu_pd(dst + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ntaps; ++k) acc += taps[k] * src[i + k];
    dst[i] = acc;
  }
}

void weighted_row_sum(const double* const* rows, const double* taps, std::size_t ntaps, std::size_t n,
                      double* dst) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < ntaps; ++k) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(rows[k] + i), acc);
    }
    _mm256_storeu_pd(dst + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ntaps; ++k) acc += taps[k] * rows[k][i];
    dst[i] = acc;
  }
}

void warp_row(const double* img, int w, int h, int y, const double* dx, const double* dy, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d xmax = _mm256_set1_pd(w - 1);
  const __m256d ymax = _mm256_set1_pd(h - 1);
  const __m256d xcap = _mm256_set1_pd(w - 2);
  const __m256d ycap = _mm256_set1_pd(h - 2);
  const __m256d width = _mm256_set1_pd(w);
  const __m256d yrow = _mm256_set1_pd(y);
  int x = 0;
  for (; x + 4 <= w; x += 4) {
    const __m256d xs = _mm256_setr_pd(x, x + 1, x + 2, x + 3);
    const __m256d xf = _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(xs, _mm256_loadu_pd(dx + x)), zero), xmax);
    const __m256d yf = _mm256_min_pd(_mm256_max_pd(_mm256_add_pd(yrow, _mm256_loadu_pd(dy + x)), zero), ymax);
    const __m256d x0 = _mm256_min_pd(_mm256_floor_pd(xf), xcap);
    const __m256d y0 = _mm256_min_pd(_mm256_floor_pd(yf), ycap);
    const __m256d fx = _mm256_sub_pd(xf, x0);
    const __m256d fy = _mm256_sub_pd(yf, y0);
    const __m128i idx = _mm256_cvttpd_epi32(_mm256_fmadd_pd(y0, width, x0));
    const __m256d a = _mm256_i32gather_pd(img, idx, 8);
    const __m256d b = _mm256_i32gather_pd(img + 1, idx, 8);
    const __m256d c = _mm256_i32gather_pd(img + w, idx, 8);
    const __m256d d = _mm256_i32gather_pd(img + w + 1, idx, 8);
    const __m256d gx = _mm256_sub_pd(one, fx);
    const __m256d top = _mm256_fmadd_pd(fx, b, _mm256_mul_pd(gx, a));
    const __m256d bot = _mm256_fmadd_pd(fx, d, _mm256_mul_pd(gx, c));
    _mm256_storeu_pd(out + x, _mm256_fmadd_pd(fy, bot, _mm256_mul_pd(_mm256_sub_pd(one, fy), top)));
  }
  for (; x < w; ++x) {
    const double xf = std::clamp(x + dx[x], 0.0, static_cast<double>(w - 1));
    const double yf = std::clamp(y + dy[x], 0.0, static_cast<double>(h - 1));
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

inline __m256d bilinear4(const double* a, const double* b, std::size_t c, __m256d w00, __m256d w01, __m256d w10,
                         __m256d w11) {
  __m256d v = _mm256_mul_pd(w00, _mm256_loadu_pd(a + c));
  v = _mm256_fmadd_pd(w01, _mm256_loadu_pd(a + c + 1), v);
  v = _mm256_fmadd_pd(w10, _mm256_loadu_pd(b + c), v);
  return _mm256_fmadd_pd(w11, _mm256_loadu_pd(b + c + 1), v);
}

void sample_block(const double* block, std::size_t stride, std::size_t win, const double* wts, double* out) {
  const __m256d w00 = _mm256_set1_pd(wts[0]);
  const __m256d w01 = _mm256_set1_pd(wts[1]);
  const __m256d w10 = _mm256_set1_pd(wts[2]);
  const __m256d w11 = _mm256_set1_pd(wts[3]);
  for (std::size_t r = 0; r < win; ++r) {
    const double* a = block + r * stride;
    const double* b = a + stride;
    double* o = out + r * win;
    std::size_t c = 0;
    for (; c + 4 <= win; c += 4) _mm256_storeu_pd(o + c, bilinear4(a, b, c, w00, w01, w10, w11));
    for (; c < win; ++c) o[c] = wts[0] * a[c] + wts[1] * a[c + 1] + wts[2] * b[c] + wts[3] * b[c + 1];
  }
}

PatchSums lk_sums(const double* block, std::size_t stride, std::size_t win, const double* wts, const double* tmpl,
                  const double* gx, const double* gy) {
  const __m256d w00 = _mm256_set1_pd(wts[0]);
  const __m256d w01 = _mm256_set1_pd(wts[1]);
  const __m256d w10 = _mm256_set1_pd(wts[2]);
  const __m256d w11 = _mm256_set1_pd(wts[3]);
  __m256d sx = _mm256_setzero_pd();
  __m256d sy = _mm256_setzero_pd();
  __m256d sq = _mm256_setzero_pd();
  PatchSums tail;
  for (std::size_t r = 0; r < win; ++r) {
    const double* a = block + r * stride;
    const double* b = a + stride;
    const std::size_t base = r * win;
    std::size_t c = 0;
    for (; c + 4 <= win; c += 4) {
      const __m256d j = bilinear4(a, b, c, w00, w01, w10, w11);
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(tmpl + base + c), j);
      sx = _mm256_fmadd_pd(d, _mm256_loadu_pd(gx + base + c), sx);
      sy = _mm256_fmadd_pd(d, _mm256_loadu_pd(gy + base + c), sy);
      sq = _mm256_fmadd_pd(d, d, sq);
    }
    for (; c < win; ++c) {
      const double j = wts[0] * a[c] + wts[1] * a[c + 1] + wts[2] * b[c] + wts[3] * b[c + 1];
      const double d = tmpl[base + c] - j;
      tail.bx += d * gx[base + c];
      tail.by += d * gy[base + c];
      tail.sq += d * d;
    }
  }
  return PatchSums{hsum(sx) + tail.bx, hsum(sy) + tail.by, hsum(sq) + tail.sq};
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table{
    Isa::avx2, soft_threshold, extrapolate, l1_norm,      squared_distance,
    correlate, weighted_row_sum, warp_row,  sample_block, lk_sums,
};
}  // namespace detail

}  // namespace wavecs::simd

#endif  // WAVECS_HAVE_AVX2_TU
