#pragma once

#include <complex>
#include <memory>
#include <span>

#include "wavecs/motion_field.hpp"

namespace wavecs {

/// Unitary 3-D DFT pair over a GridDims volume (FFTW backed).
///
///   synthesize: f[x] = n^{-1/2} sum_k theta[k] exp(+2 pi i k.x / N)
///   analyze:    theta[k] = n^{-1/2} sum_x f[x] exp(-2 pi i k.x / N)
///
/// analyze is the adjoint (and inverse) of synthesize. One instance owns a
/// scratch buffer, so concurrent calls on the same instance are not allowed.
class Fft3 {
 public:
  explicit Fft3(GridDims dims);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  const GridDims& dims() const noexcept { return dims_; }

  void synthesize(std::span<const std::complex<double>> coeffs, std::span<std::complex<double>> field);
  void analyze(std::span<const std::complex<double>> field, std::span<std::complex<double>> coeffs);

 private:
  struct Plans;
  GridDims dims_;
  std::unique_ptr<Plans> plans_;
};

/// Signed frequency of DFT bin k for a length-n axis: k for k <= n/2, else k - n.
inline int signed_frequency(int k, int n) noexcept { return k <= n / 2 ? k : k - n; }

}  // namespace wavecs
