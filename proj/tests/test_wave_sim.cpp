#include <gtest/gtest.h>

#include <cmath>

#include "wavecs/error.hpp"
#include "wavecs/fft3.hpp"
#include "wavecs/wave_sim.hpp"

using namespace wavecs;

namespace {

SurfaceModel two_waves() {
  SurfaceModel m;
  m.depth_gain = depth_gain_for_depth(500.0);
  m.waves.push_back({0.02, 2 * M_PI / 64, 2 * M_PI / 128, 2 * M_PI / 20, 0.3});
  m.waves.push_back({0.015, -2 * M_PI / 32, 0.0, 4 * M_PI / 20, 1.1});
  return m;
}

}  // namespace

TEST(WaveSim, DisplacementIsGainTimesSurfaceGradient) {
  const SurfaceModel m = two_waves();
  const double h = 1e-5;
  for (double x : {0.0, 13.3, 100.0}) {
    for (double t : {0.0, 7.0}) {
      const double y = 0.5 * x + 3;
      const double gx = (surface_height(m, x + h, y, t) - surface_height(m, x - h, y, t)) / (2 * h);
      const double gy = (surface_height(m, x, y + h, t) - surface_height(m, x, y - h, t)) / (2 * h);
      const Displacement2 d = surface_displacement(m, x, y, t);
      EXPECT_NEAR(d.dx, m.depth_gain * gx, 1e-6);
      EXPECT_NEAR(d.dy, m.depth_gain * gy, 1e-6);
    }
  }
}

TEST(WaveSim, DepthGainFromRefraction) {
  EXPECT_NEAR(depth_gain_for_depth(500.0), 500.0 * (1 - 1 / 1.33), 1e-12);
}

TEST(WaveSim, InverseMapUndoesDisplacement) {
  const SurfaceModel m = two_waves();
  for (double x : {4.0, 50.5, 97.0}) {
    const double y = 31.0, t = 3.0;
    const Displacement2 hinv = inverse_displacement(m, x, y, t);
    const double px = x + hinv.dx, py = y + hinv.dy;
    const Displacement2 g = surface_displacement(m, px, py, t);
    EXPECT_NEAR(px + g.dx, x, 1e-9);
    EXPECT_NEAR(py + g.dy, y, 1e-9);
  }
}

TEST(WaveSim, AnalyticRmsMatchesSampledField) {
  RandomModelOptions o;
  o.width = 64;
  o.height = 64;
  o.frames = 30;
  o.min_wavelength = 20;
  o.max_wavelength = 64;
  const SurfaceModel m = random_model(5, 3, 4.0, o);
  EXPECT_NEAR(analytic_rms_displacement(m), 4.0, 1e-9);
  const MotionField f = displacement_field(m, 64, 64, 30);
  double s = 0.0;
  for (const auto& v : f.values()) s += std::norm(v);
  // Commensurate waves integrate exactly over the grid, barring aliasing between waves.
  EXPECT_NEAR(std::sqrt(s / f.values().size()), 4.0, 0.25);
}

TEST(WaveSim, CommensurateFieldIsExactlyFourierSparse) {
  RandomModelOptions o;
  o.width = 64;
  o.height = 48;
  o.frames = 20;
  o.min_wavelength = 16;
  o.max_wavelength = 64;
  const SurfaceModel m = random_model(11, 3, 3.0, o);
  const MotionField f = displacement_field(m, 64, 48, 20);
  std::vector<std::complex<double>> c(f.values().size());
  Fft3 fft(f.dims());
  fft.analyze(f.values(), c);
  double peak = 0.0;
  for (const auto& v : c) peak = std::max(peak, std::abs(v));
  std::size_t nonzero = 0;
  for (const auto& v : c) nonzero += std::abs(v) > 1e-9 * peak;
  EXPECT_LE(nonzero, 2u * m.waves.size());
}

TEST(WaveSim, RandomModelIsDeterministicAndBounded) {
  const SurfaceModel a = random_model(99, 3, 6.0);
  const SurfaceModel b = random_model(99, 3, 6.0);
  ASSERT_EQ(a.waves.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.waves[i].amplitude, b.waves[i].amplitude);
    EXPECT_EQ(a.waves[i].kx, b.waves[i].kx);
    const double lam = 2 * M_PI / std::hypot(a.waves[i].kx, a.waves[i].ky);
    EXPECT_GE(lam, 100.0 - 1e-9);
    EXPECT_LE(lam, 256.0 + 1e-9);
  }
  EXPECT_NEAR(analytic_rms_displacement(a), 6.0, 1e-9);
}

TEST(WaveSim, JsonRoundTrip) {
  const SurfaceModel m = two_waves();
  const SurfaceModel r = model_from_json(model_to_json(m, 7));
  ASSERT_EQ(r.waves.size(), m.waves.size());
  EXPECT_DOUBLE_EQ(r.depth_gain, m.depth_gain);
  EXPECT_DOUBLE_EQ(r.waves[1].phase, m.waves[1].phase);
  EXPECT_THROW(model_from_json("{\"waves\": 3}"), DataError);
}

TEST(WaveSim, ValidationRejectsDegenerateWaves) {
  SurfaceModel m = two_waves();
  m.waves[0].kx = m.waves[0].ky = 0.0;
  EXPECT_THROW(validate(m), UsageError);
  EXPECT_THROW(random_model(1, 0, 5.0), UsageError);
}

TEST(WaveSim, SynthesisIsDeterministicAndRestorableWithTrueField) {
  const Frame clean = make_test_scene(SceneKind::texture, 48, 40, 3);
  SurfaceModel m = two_waves();
  const GroundTruthBundle a = synthesize(clean, m, 4, 1);
  const GroundTruthBundle b = synthesize(clean, m, 4, 1);
  EXPECT_EQ(a.distorted.frames, b.distorted.frames);
  ASSERT_EQ(a.true_field.dims(), (GridDims{48, 40, 4}));
  // Restoring with the true field recovers the interior of the clean scene.
  const Frame r = warp(a.distorted.frames[2], a.true_field.slice(2));
  double err = 0.0;
  int n = 0;
  for (int y = 8; y < 32; ++y)
    for (int x = 8; x < 40; ++x, ++n) err += std::abs(r(x, y) - clean(x, y));
  EXPECT_LT(err / n, 0.02);
}

TEST(WaveSim, TinyAmplitudeLeavesFramesUnchanged) {
  const Frame clean = make_test_scene(SceneKind::blocks, 32, 32, 2);
  SurfaceModel m = two_waves();
  m.depth_gain = 0.0;
  const GroundTruthBundle g = synthesize(clean, m, 3, 0);
  for (const Frame& f : g.distorted.frames) EXPECT_EQ(f, clean);
}
