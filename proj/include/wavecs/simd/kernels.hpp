#pragma once

// Data-parallel inner loops shared by the solver, the optical-flow stage, the
// tracker and the resampling code. Every kernel has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant. The variant is chosen
// once at startup from the CPU feature bits; WAVECS_SIMD=scalar forces the
// reference path. The two variants are tested for equivalence.

#include <complex>
#include <cstddef>
#include <string_view>

namespace wavecs::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

struct PatchSums {
  double bx = 0.0;  // sum (T - J) * gx
  double by = 0.0;  // sum (T - J) * gy
  double sq = 0.0;  // sum (T - J)^2
};

struct KernelTable {
  Isa isa;

  /// Complex soft-thresholding: shrink |z| by thr, keep the phase.
  void (*soft_threshold)(const std::complex<double>* in, double thr, std::complex<double>* out, std::size_t n);

  /// out = cur + beta * (cur - prev), elementwise over n reals.
  void (*extrapolate)(const double* cur, const double* prev, double beta, double* out, std::size_t n);

  /// Sum of complex magnitudes.
  double (*l1_norm)(const std::complex<double>* z, std::size_t n);

  /// Sum of squared differences over n reals.
  double (*squared_distance)(const double* a, const double* b, std::size_t n);

  /// dst[i] = sum_k taps[k] * src[i + k] for i < n. src holds n + ntaps - 1 values.
  void (*correlate)(const double* src, std::size_t n, const double* taps, std::size_t ntaps, double* dst);

  /// dst[i] = sum_k taps[k] * rows[k][i] for i < n.
  void (*weighted_row_sum)(const double* const* rows, const double* taps, std::size_t ntaps, std::size_t n,
                           double* dst);

  /// Bilinear clamp-to-edge resampling of one output row:
  /// out[x] = img(x + dx[x], y + dy[x]). Requires w, h >= 2.
  void (*warp_row)(const double* img, int w, int h, int y, const double* dx, const double* dy, double* out);

  /// Bilinear sampling of a win x win patch from a (win+1) x (win+1) block of
  /// integer samples, all sharing the same fractional offset. weights = {w00, w01, w10, w11}.
  void (*sample_block)(const double* block, std::size_t stride, std::size_t win, const double* weights,
                       double* out);

  /// Same sampling as sample_block, fused with the Lucas-Kanade mismatch sums
  /// against a template patch and its gradients.
  PatchSums (*lk_sums)(const double* block, std::size_t stride, std::size_t win, const double* weights,
                       const double* tmpl, const double* gx, const double* gy);
};

/// The table selected for this process.
const KernelTable& kernels() noexcept;

/// The scalar reference table.
const KernelTable& scalar_kernels() noexcept;

/// The AVX2 table when it was compiled in and the CPU supports it, else nullptr.
const KernelTable* avx2_kernels() noexcept;

}  // namespace wavecs::simd
