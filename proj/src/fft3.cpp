#include "wavecs/fft3.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "wavecs/error.hpp"

namespace wavecs {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft3::Plans {
  fftw_complex* buffer = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::size_t n = 0;
  double scale = 1.0;
};

Fft3::Fft3(GridDims dims) : dims_(dims), plans_(std::make_unique<Plans>()) {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nt <= 0) throw DataError("Fft3: dimensions must be positive");
  plans_->n = dims.size();
  plans_->scale = 1.0 / std::sqrt(static_cast<double>(plans_->n));
  std::lock_guard lock(planner_mutex());
  plans_->buffer = fftw_alloc_complex(plans_->n);
  if (!plans_->buffer) throw std::bad_alloc();
  plans_->forward =
      fftw_plan_dft_3d(dims.nt, dims.ny, dims.nx, plans_->buffer, plans_->buffer, FFTW_FORWARD, FFTW_ESTIMATE);
  plans_->backward =
      fftw_plan_dft_3d(dims.nt, dims.ny, dims.nx, plans_->buffer, plans_->buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!plans_->forward || !plans_->backward) throw NumericalError("FFTW planning failed");
}

Fft3::~Fft3() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->backward) fftw_destroy_plan(plans_->backward);
  if (plans_->buffer) fftw_free(plans_->buffer);
}

namespace {

void run(fftw_plan plan, fftw_complex* buffer, std::size_t n, double scale, std::span<const std::complex<double>> in,
         std::span<std::complex<double>> out) {
  if (in.size() != n || out.size() != n) throw DataError("Fft3: buffer size does not match grid");
  auto* b = reinterpret_cast<std::complex<double>*>(buffer);
  for (std::size_t i = 0; i < n; ++i) b[i] = in[i];
  fftw_execute(plan);
  for (std::size_t i = 0; i < n; ++i) out[i] = b[i] * scale;
}

}  // namespace

void Fft3::synthesize(std::span<const std::complex<double>> coeffs, std::span<std::complex<double>> field) {
  run(plans_->backward, plans_->buffer, plans_->n, plans_->scale, coeffs, field);
}

void Fft3::analyze(std::span<const std::complex<double>> field, std::span<std::complex<double>> coeffs) {
  run(plans_->forward, plans_->buffer, plans_->n, plans_->scale, field, coeffs);
}

}  // namespace wavecs
