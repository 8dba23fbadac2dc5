#pragma once

// Synthetic wavy-water distortion.
//
// The surface is a sum of travelling sinusoids
//   z(x, y, t) = sum_k a_k sin(kx_k x + ky_k y + w_k t + phi_k)
// and the apparent displacement of the scene point under (x, y) follows the
// small-slope refraction model d = alpha * grad z, alpha = h (1 - 1/n_w).
//
// Displacements are indexed by the undistorted scene point: the scene point
// p is observed at p + d(p, t) in frame t. A distorted frame is rendered by
// inverting that map per pixel, so restoring frame t by sampling it at
// x + d(x, t) reproduces the clean scene up to interpolation error.

#include <cstdint>
#include <string>
#include <vector>

#include "wavecs/imaging.hpp"
#include "wavecs/motion_field.hpp"

namespace wavecs {

inline constexpr double kWaterRefractiveIndex = 1.33;

struct SineWave {
  double amplitude = 0.0;  // surface height, pixel units
  double kx = 0.0;         // rad / pixel
  double ky = 0.0;         // rad / pixel
  double omega = 0.0;      // rad / frame
  double phase = 0.0;      // rad
};

struct SurfaceModel {
  std::vector<SineWave> waves;
  double depth_gain = 0.0;  // alpha: pixels of displacement per unit slope
};

/// alpha = depth (1 - 1/n_w) for a scene depth given in pixels.
double depth_gain_for_depth(double depth_px, double refractive_index = kWaterRefractiveIndex);

/// Depth of 25 cm at the default 0.5 mm pixel pitch, expressed in pixels.
inline constexpr double kDefaultDepthPx = 0.25 / 0.0005;

/// Throws UsageError if the model violates its invariants.
void validate(const SurfaceModel& model);

double surface_height(const SurfaceModel& model, double x, double y, double t);

/// Analytic alpha * grad z at (x, y, t).
Displacement2 surface_displacement(const SurfaceModel& model, double x, double y, double t);

/// Dense field of surface_displacement over a width x height x frames grid.
MotionField displacement_field(const SurfaceModel& model, int width, int height, int frames);

/// Solves p + d(p, t) = (x, y) for the scene point p seen at pixel (x, y)
/// and returns p - (x, y). Newton iteration on the analytic Jacobian.
Displacement2 inverse_displacement(const SurfaceModel& model, double x, double y, double t);

/// sqrt of the space-time mean of |d|^2, assuming distinct frequencies.
double analytic_rms_displacement(const SurfaceModel& model);

/// Upper bound on the spectral norm of the displacement Jacobian; the
/// distortion map is invertible (no caustic folds) when this is below 1.
double max_distortion_slope(const SurfaceModel& model);

struct RandomModelOptions {
  int width = 256;
  int height = 256;
  int frames = 101;
  /// Draw integer cycle counts over the grid so the field is exactly periodic
  /// (and exactly sparse under the DFT).
  bool commensurate = true;
  double min_wavelength = 100.0;  // px
  double max_wavelength = 256.0;  // px
  int min_temporal_cycles = 1;
  int max_temporal_cycles = 3;
  double depth_px = kDefaultDepthPx;
  /// Models whose max_distortion_slope exceeds this are redrawn.
  double max_slope = 0.85;
};

/// Random K-wave model, amplitudes rescaled so analytic_rms_displacement
/// equals target_sigma_motion. Deterministic in seed.
///
/// Parameter ranges: wavelength uniform in [min_wavelength, max_wavelength],
/// direction uniform in [0, 2 pi), temporal cycles uniform in
/// [min_temporal_cycles, max_temporal_cycles] over the clip, phase uniform in
/// [0, 2 pi), raw amplitude uniform in [0.5, 1] before rescaling.
SurfaceModel random_model(std::uint64_t seed, int num_waves, double target_sigma_motion,
                          const RandomModelOptions& options = {});

struct GroundTruthBundle {
  Video distorted;
  MotionField true_field;
  Frame clean;
  SurfaceModel model;
  std::uint64_t rng_seed = 0;
};

struct SynthesisOptions {
  double fps = 50.0;
  /// Std-dev of additive Gaussian sensor noise (intensity units), drawn from rng_seed.
  double noise_sigma = 0.0;
};

GroundTruthBundle synthesize(const Frame& clean, const SurfaceModel& model, int frames, std::uint64_t seed,
                             const SynthesisOptions& options = {});

/// Frame t of the distorted video only.
Frame distort_frame(const Frame& clean, const SurfaceModel& model, int t);

std::string model_to_json(const SurfaceModel& model, std::uint64_t seed);
SurfaceModel model_from_json(const std::string& text);

enum class SceneKind { texture, checker, blocks };

/// Procedural test scenes with values in [0.1, 0.9].
/// texture: band-limited random texture (high density of corners)
/// checker: checkerboard with 8-pixel squares
/// blocks:  random overlapping rectangles over a smooth background
Frame make_test_scene(SceneKind kind, int width, int height, std::uint64_t seed);

SceneKind scene_kind_from_string(const std::string& name);

}  // namespace wavecs
