#pragma once

// Image and video containers plus the resampling primitives every stage uses.
//
// Coordinates are pixel centers: (0, 0) is the center of the top-left pixel,
// x grows to the right and y downwards. All resampling is bilinear with
// clamp-to-edge replication outside [0, W-1] x [0, H-1].

#include <cstddef>
#include <span>
#include <vector>

namespace wavecs {

/// Unconstrained real-valued grid, row-major. Used for intermediate
/// quantities (fields, filter responses, polynomial coefficients).
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0);

  double& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }
  std::span<double> row(int y) { return {data.data() + static_cast<std::size_t>(y) * width, std::size_t(width)}; }
  std::span<const double> row(int y) const {
    return {data.data() + static_cast<std::size_t>(y) * width, std::size_t(width)};
  }

  friend bool operator==(const Plane& a, const Plane& b) = default;
};

/// Grayscale intensity image. Every stored value is finite and in [0, 1].
class Frame {
 public:
  Frame() = default;
  Frame(int w, int h, double fill = 0.0);

  /// Clamps values into [0, 1]; throws DataError on non-finite input.
  static Frame from_plane(Plane p);

  int width() const noexcept { return plane_.width; }
  int height() const noexcept { return plane_.height; }
  std::size_t size() const noexcept { return plane_.size(); }
  bool empty() const noexcept { return plane_.empty(); }

  double operator()(int x, int y) const { return plane_(x, y); }
  void set(int x, int y, double v);

  std::span<const double> pixels() const noexcept { return plane_.data; }
  const Plane& plane() const noexcept { return plane_; }

  friend bool operator==(const Frame& a, const Frame& b) = default;

 private:
  Plane plane_;
};

struct Video {
  std::vector<Frame> frames;
  double fps = 50.0;

  std::size_t size() const noexcept { return frames.size(); }
  int width() const noexcept { return frames.empty() ? 0 : frames.front().width(); }
  int height() const noexcept { return frames.empty() ? 0 : frames.front().height(); }
};

/// Throws DataError unless the video has at least min_frames frames of
/// identical, non-empty dimensions.
void check_video(const Video& video, std::size_t min_frames);

struct Displacement2 {
  double dx = 0.0;
  double dy = 0.0;
};

/// Per-pixel displacement grid, stored as two planes.
struct FlowField {
  Plane dx;
  Plane dy;

  FlowField() = default;
  FlowField(int w, int h) : dx(w, h), dy(w, h) {}

  int width() const noexcept { return dx.width; }
  int height() const noexcept { return dx.height; }
  Displacement2 at(int x, int y) const { return {dx(x, y), dy(x, y)}; }
  void set(int x, int y, Displacement2 d) {
    dx(x, y) = d.dx;
    dy(x, y) = d.dy;
  }
};

double sample_bilinear(const Plane& img, double x, double y) noexcept;
double sample_bilinear(const Frame& frame, double x, double y) noexcept;

/// output(x, y) = input(x + dx(x, y), y + dy(x, y)). Used for synthetic
/// distortion as well as restoration. Throws DataError on a size mismatch
/// or a non-finite displacement.
Plane warp(const Plane& img, const FlowField& field);
Frame warp(const Frame& frame, const FlowField& field);

Frame mean_frame(const Video& video);
Frame median_frame(const Video& video);

/// Normalized 1-D Gaussian taps of length 2 * radius + 1.
std::vector<double> gaussian_taps(double sigma, int radius);

/// Separable correlation with clamp-to-edge borders.
Plane separable_filter(const Plane& img, std::span<const double> taps_x, std::span<const double> taps_y);

Plane gaussian_blur(const Plane& img, double sigma);

/// Bilinear resize with pixel-area alignment (output pixel centers map to
/// ((x + 0.5) * W / w - 0.5) in the source).
Plane resize(const Plane& img, int w, int h);

/// Crops the largest centered region with the target aspect ratio, then
/// resizes it to w x h.
Frame center_crop_resize(const Frame& frame, int w, int h);

}  // namespace wavecs
