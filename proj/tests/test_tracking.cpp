#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "wavecs/error.hpp"
#include "wavecs/tracking.hpp"
#include "wavecs/wave_sim.hpp"

using namespace wavecs;

namespace {

// frame_t(x) = scene(x - t * v): content moves by v per frame.
Video drifting(const Frame& scene, double vx, double vy, int frames) {
  Video v;
  for (int t = 0; t < frames; ++t) {
    FlowField d(scene.width(), scene.height());
    for (double& a : d.dx.data) a = -vx * t;
    for (double& a : d.dy.data) a = -vy * t;
    v.frames.push_back(warp(scene, d));
  }
  return v;
}

Trajectory line_trajectory(double step, int frames) {
  Trajectory tr;
  for (int t = 0; t < frames; ++t) tr.points.push_back({10.0 + step * t, 20.0});
  return tr;
}

}  // namespace

TEST(Detector, CheckerboardCornersAtSquareJunctions) {
  const Frame f = make_test_scene(SceneKind::checker, 64, 64, 0);
  const auto corners = harris_corners(f);
  ASSERT_FALSE(corners.empty());
  for (const Feature& c : corners) {
    // Junctions sit between pixels 8k-1 and 8k.
    EXPECT_NEAR(std::fmod(c.x + 0.5, 8.0), 0.0, 0.3) << c.x;
    EXPECT_NEAR(std::fmod(c.y + 0.5, 8.0), 0.0, 0.3) << c.y;
  }
}

TEST(Detector, UnionIsDeduplicatedAndDeterministic) {
  const Frame f = make_test_scene(SceneKind::blocks, 96, 80, 4);
  DetectorParams p;
  const auto a = detect_features(f, p);
  const auto b = detect_features(f, p);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_FALSE(a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      EXPECT_GT(std::hypot(a[i].x - a[j].x, a[i].y - a[j].y), p.dedupe_radius);
    }
  }
  p.max_features = 5;
  EXPECT_EQ(detect_features(f, p).size(), 5u);
}

TEST(Detector, FastFiresOnIsolatedDot) {
  Frame f(32, 32, 0.2);
  f.set(16, 16, 0.9);
  const auto k = fast_keypoints(f);
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(k[0].x, 16.0);
  EXPECT_TRUE(fast_keypoints(Frame(32, 32, 0.5)).empty());
}

TEST(Tracker, FollowsSubpixelDrift) {
  const Frame scene = make_test_scene(SceneKind::texture, 96, 96, 8);
  const double vx = 0.7, vy = -0.4;
  const Video v = drifting(scene, vx, vy, 6);
  std::vector<Point2> seeds;
  for (const Feature& f : detect_features(v.frames[0])) {
    if (f.x > 24 && f.x < 72 && f.y > 24 && f.y < 72) seeds.push_back({f.x, f.y});
  }
  ASSERT_GT(seeds.size(), 10u);
  TrackerParams tp;
  tp.cot_split_threshold = 100.0;
  const auto trajs = track(v, seeds, tp);
  std::vector<double> err;
  for (const Trajectory& tr : trajs) {
    ASSERT_EQ(tr.points.size(), 6u);
    if (!tr.valid) continue;
    for (int t = 0; t < 6; ++t) {
      err.push_back(std::hypot(tr.points[t].x - (tr.points[0].x + vx * t), tr.points[t].y - (tr.points[0].y + vy * t)));
    }
  }
  ASSERT_GT(err.size(), seeds.size() * 3);
  std::sort(err.begin(), err.end());
  EXPECT_LT(err[err.size() / 2], 0.05);
}

TEST(Tracker, UniformWindowFollowsSubpixelDrift) {
  const Frame scene = make_test_scene(SceneKind::texture, 96, 96, 8);
  const Video v = drifting(scene, 0.7, -0.4, 4);
  const std::vector<Point2> seeds{{40.3, 44.8}, {52.1, 50.6}};
  TrackerParams tp;
  tp.weight_sigma = 0.0;
  tp.cot_split_threshold = 100.0;
  for (const Trajectory& tr : track(v, seeds, tp)) {
    ASSERT_TRUE(tr.valid);
    EXPECT_NEAR(tr.points[3].x - tr.points[0].x, 2.1, 0.05);
    EXPECT_NEAR(tr.points[3].y - tr.points[0].y, -1.2, 0.05);
  }
}

// Under a curved field a uniform window reports the window-averaged
// displacement; centre weighting stays closer to the value at the point.
TEST(Tracker, CentreWeightingReducesCurvatureBias) {
  const int n = 192;
  const Frame scene = make_test_scene(SceneKind::texture, n, n, 5);
  const double amp = 4.0, k = 2 * std::numbers::pi / 48.0;
  FlowField d(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) d.dx(x, y) = -amp * std::sin(k * x);
  Video v;
  v.frames = {scene, warp(scene, d)};
  // Frame 1 shows scene point p at the x solving x - amp * sin(k x) = p.
  const auto truth = [&](double p) {
    double x = p;
    for (int i = 0; i < 200; ++i) x = p + amp * std::sin(k * x);
    return x;
  };
  std::vector<Point2> seeds;
  for (int y = 40; y <= 150; y += 11)
    for (int x = 40; x <= 150; x += 7) seeds.push_back({x + 0.25, y + 0.5});
  const auto median_error = [&](double sigma) {
    TrackerParams tp;
    tp.weight_sigma = sigma;
    tp.cot_split_threshold = 100.0;
    std::vector<double> err;
    for (const Trajectory& tr : track(v, seeds, tp))
      if (tr.valid) err.push_back(std::abs(tr.points[1].x - truth(tr.points[0].x)));
    EXPECT_GT(err.size(), seeds.size() / 2);
    std::sort(err.begin(), err.end());
    return err[err.size() / 2];
  };
  const double uniform = median_error(0.0);
  const double weighted = median_error(4.0);
  EXPECT_LT(weighted, 0.6 * uniform);
}

TEST(Tracker, RejectsSeedsOutsideTheFrame) {
  const Video v = drifting(make_test_scene(SceneKind::texture, 32, 32, 1), 0, 0, 2);
  const std::vector<Point2> bad{{40.0, 3.0}};
  EXPECT_THROW(track(v, bad), DataError);
  EXPECT_THROW(track(v, std::vector<Point2>{}), DataError);
}

TEST(Tracker, FlatRegionFailsEigenvalueCheck) {
  Video v;
  for (int t = 0; t < 3; ++t) v.frames.push_back(Frame(48, 48, 0.5));
  const std::vector<Point2> seeds{{24.0, 24.0}};
  const auto trajs = track(v, seeds);
  EXPECT_FALSE(trajs[0].valid);
  EXPECT_EQ(trajs[0].reason, RejectReason::klt);
  EXPECT_EQ(trajs[0].failed_at, 1);
}

TEST(CotSplit, DistanceClosedForm) {
  // Constant speed s over T frames: the half-COTs are s * ceil(T/2) apart.
  EXPECT_NEAR(cot_split_distance(line_trajectory(1.0, 6)), 3.0, 1e-12);
  EXPECT_NEAR(cot_split_distance(line_trajectory(1.0, 8)), 4.0, 1e-12);
  EXPECT_NEAR(cot_split_distance(line_trajectory(0.5, 7)), 2.0, 1e-12);
}

TEST(CotSplit, RuleRejectsOnlyDriftBeyondThreshold) {
  std::vector<Trajectory> trajs{line_trajectory(1.0, 6), line_trajectory(1.0, 8), line_trajectory(0.0, 8)};
  EXPECT_EQ(apply_cot_split_rule(trajs, 3.0), 1);
  EXPECT_TRUE(trajs[0].valid);
  EXPECT_FALSE(trajs[1].valid);
  EXPECT_EQ(trajs[1].reason, RejectReason::cot_split);
  EXPECT_TRUE(trajs[2].valid);
}

TEST(Displacements, OffsetsAreRelativeToCot) {
  Trajectory tr;
  tr.points = {{1, 1}, {3, 1}, {2, 4}};
  const auto d = to_displacement(tr, AnchorMode::mean);
  EXPECT_NEAR(d.anchor.x, 2.0, 1e-15);
  EXPECT_NEAR(d.anchor.y, 2.0, 1e-15);
  double sx = 0, sy = 0;
  for (const auto& o : d.offsets) {
    sx += o.dx;
    sy += o.dy;
  }
  EXPECT_NEAR(sx, 0.0, 1e-14);
  EXPECT_NEAR(sy, 0.0, 1e-14);
  const auto m = to_displacement(tr, AnchorMode::median);
  EXPECT_EQ(m.anchor.y, 1.0);
  tr.valid = false;
  EXPECT_THROW(to_displacement(tr, AnchorMode::mean), DataError);
}

TEST(Trajectories, CsvRoundTrip) {
  std::vector<Trajectory> trajs(2);
  trajs[0].id = 0;
  trajs[0].points = {{1.25, 2.5}, {1.5, 2.75}};
  trajs[1].id = 5;
  trajs[1].points = {{10, 11}, {12, 13}};
  trajs[1].valid = false;
  const auto path = std::filesystem::temp_directory_path() / "wavecs_trajs.csv";
  write_trajectories_csv(trajs, path);
  const auto back = read_trajectories_csv(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].id, 5);
  EXPECT_FALSE(back[1].valid);
  EXPECT_DOUBLE_EQ(back[0].points[1].y, 2.75);
}
