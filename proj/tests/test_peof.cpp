#include <gtest/gtest.h>

#include <cmath>

#include "wavecs/error.hpp"
#include "wavecs/peof.hpp"
#include "wavecs/wave_sim.hpp"

using namespace wavecs;

namespace {

Frame shifted(const Frame& f, double dx, double dy) {
  FlowField d(f.width(), f.height());
  for (double& v : d.dx.data) v = -dx;
  for (double& v : d.dy.data) v = -dy;
  return warp(f, d);
}

}  // namespace

TEST(PolyExpand, ExactOnGlobalQuadratic) {
  const double c = 0.3, bx = 0.01, by = -0.02, axx = 0.001, ayy = 0.002, axy = -0.0015;
  Plane p(40, 30);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) p(x, y) = c + bx * x + by * y + axx * x * x + ayy * y * y + axy * x * y;
  const PolyExpansion e = poly_expand(p, 11, 1.5);
  for (int y = 5; y < 25; ++y) {
    for (int x = 5; x < 35; ++x) {
      EXPECT_NEAR(e.axx(x, y), axx, 1e-9);
      EXPECT_NEAR(e.ayy(x, y), ayy, 1e-9);
      EXPECT_NEAR(e.axy(x, y), axy, 1e-9);
      EXPECT_NEAR(e.bx(x, y), bx + 2 * axx * x + axy * y, 1e-9);
      EXPECT_NEAR(e.by(x, y), by + 2 * ayy * y + axy * x, 1e-9);
      EXPECT_NEAR(e.c(x, y), p(x, y), 1e-9);
    }
  }
}

TEST(PolyExpand, RejectsBadWindow) {
  EXPECT_THROW(poly_expand(Plane(8, 8), 4, 1.5), UsageError);
  EXPECT_THROW(poly_expand(Plane(8, 8), 5, 0.0), UsageError);
}

TEST(Flow, IdenticalFramesGiveZeroFlow) {
  const Frame f = make_test_scene(SceneKind::texture, 64, 64, 2);
  const FlowField d = estimate_flow(f, f, FlowParams{});
  for (double v : d.dx.data) EXPECT_LE(std::abs(v), 1e-3);
  for (double v : d.dy.data) EXPECT_LE(std::abs(v), 1e-3);
}

TEST(Flow, RecoversConstantShift) {
  const Frame from = make_test_scene(SceneKind::texture, 96, 96, 3);
  const Frame to = shifted(from, 2.3, -1.7);
  const FlowField d = estimate_flow(from, to, FlowParams{});
  double err = 0.0;
  int n = 0;
  for (int y = 16; y < 80; ++y)
    for (int x = 16; x < 80; ++x, ++n) err += std::hypot(d.dx(x, y) - 2.3, d.dy(x, y) + 1.7);
  EXPECT_LT(err / n, 0.2);
}

TEST(Flow, StepKeepsPriorWhereSystemIsSingular) {
  const PolyExpansion flat = poly_expand(Plane(32, 32, 0.5), 11, 1.5);
  FlowField prior(32, 32);
  for (double& v : prior.dx.data) v = 0.25;
  const FlowField out = flow_step(flat, flat, prior, FlowParams{});
  for (double v : out.dx.data) EXPECT_EQ(v, 0.25);
}

TEST(Flow, RestoredVideoRegistersToTheMean) {
  const Frame scene = make_test_scene(SceneKind::texture, 64, 64, 4);
  Video v;
  for (double s : {-1.0, 0.0, 1.0}) v.frames.push_back(shifted(scene, s, 0.5 * s));
  std::vector<FlowField> flows;
  const Video r = restore_video_peof(v, FlowParams{}, 1, &flows);
  ASSERT_EQ(r.size(), 3u);
  ASSERT_EQ(flows.size(), 3u);
  // Frames 0 and 2 move in opposite directions relative to the mean.
  EXPECT_LT(flows[0].dx(32, 32), -0.5);
  EXPECT_GT(flows[2].dx(32, 32), 0.5);
  EXPECT_THROW(restore_video_peof(v, FlowParams{}, 0), UsageError);
}
