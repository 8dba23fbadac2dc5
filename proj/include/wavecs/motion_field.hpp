#pragma once

#include <complex>
#include <cstddef>
#include <filesystem>
#include <vector>

#include "wavecs/imaging.hpp"

namespace wavecs {

/// Extent of a space-time grid: nx columns, ny rows, nt frames.
struct GridDims {
  int nx = 0;
  int ny = 0;
  int nt = 0;

  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
  std::size_t size() const noexcept { return plane_size() * nt; }
  std::size_t index(int x, int y, int t) const noexcept {
    return (static_cast<std::size_t>(t) * ny + y) * nx + x;
  }

  friend bool operator==(const GridDims&, const GridDims&) = default;
};

/// Dense motion field d = dx + i*dy over (x, y, t), in pixels. Index layout
/// is t-major, then row-major within a frame.
class MotionField {
 public:
  MotionField() = default;
  explicit MotionField(GridDims dims);

  const GridDims& dims() const noexcept { return dims_; }
  std::complex<double>& operator()(int x, int y, int t) { return values_[dims_.index(x, y, t)]; }
  std::complex<double> operator()(int x, int y, int t) const { return values_[dims_.index(x, y, t)]; }

  std::vector<std::complex<double>>& values() noexcept { return values_; }
  const std::vector<std::complex<double>>& values() const noexcept { return values_; }

  FlowField slice(int t) const;
  void set_slice(int t, const FlowField& flow);

  /// Throws NumericalError if any component is NaN or infinite.
  void check_finite() const;

 private:
  GridDims dims_;
  std::vector<std::complex<double>> values_;
};

/// Binary field format: the 4 magic bytes "WMVF", then W, H, T as
/// little-endian uint32, then for t, y, x (x fastest) one little-endian
/// float32 pair (dx, dy).
void write_motion_field(const MotionField& field, const std::filesystem::path& path);
MotionField read_motion_field(const std::filesystem::path& path);

}  // namespace wavecs
