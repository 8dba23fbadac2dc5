#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "wavecs/error.hpp"
#include "wavecs/image_io.hpp"
#include "wavecs/pipeline.hpp"
#include "wavecs/wave_sim.hpp"

using namespace wavecs;
namespace fs = std::filesystem;

namespace {

PipelineConfig small_config(Mode m) {
  PipelineConfig c;
  c.mode = m;
  c.solver.downsample = 4;
  c.flow.iterations = 3;
  return c;
}

const GroundTruthBundle& small_scene() {
  static const GroundTruthBundle gt = [] {
    RandomModelOptions o;
    o.width = 64;
    o.height = 64;
    o.frames = 12;
    o.min_wavelength = 40;
    o.max_wavelength = 64;
    return synthesize(make_test_scene(SceneKind::texture, 64, 64, 5), random_model(3, 2, 1.5, o), 12, 3);
  }();
  return gt;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wavecs_pipe_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, JsonRoundTripAndValidation) {
  PipelineConfig c;
  c.mode = Mode::peof;
  c.solver.downsample = 2;
  c.flow.iterations = 4;
  c.seed = 77;
  const PipelineConfig r = config_from_json(config_to_json(c));
  EXPECT_EQ(r.mode, Mode::peof);
  EXPECT_EQ(r.solver.downsample, 2);
  EXPECT_EQ(r.flow.iterations, 4);
  EXPECT_EQ(r.seed, 77u);
  EXPECT_EQ(config_to_json(r), config_to_json(c));
  EXPECT_THROW(config_from_json("{\"bogus\": 1}"), UsageError);
  EXPECT_THROW(config_from_json("{\"mode\": \"fast\"}"), UsageError);
  EXPECT_THROW(config_from_json("{\"solver\": {\"cv_holdout\": 2}}"), UsageError);
  EXPECT_THROW(config_from_json("{not json"), UsageError);
}

TEST(Pipeline, StaticVideoMeanEqualsFirstFrame) {
  Video v;
  const Frame f = make_test_scene(SceneKind::texture, 48, 48, 1);
  v.frames.assign(10, f);
  for (Mode m : {Mode::cs, Mode::peof, Mode::cs_peof}) {
    const RestoreResult r = run_restore(v, small_config(m));
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(r.mean_image.pixels()[i], f.pixels()[i], 1e-3);
  }
}

TEST(Pipeline, RejectsShortVideoAndFeaturelessCsInput) {
  Video v;
  v.frames.assign(5, make_test_scene(SceneKind::texture, 32, 32, 1));
  EXPECT_THROW(run_restore(v, small_config(Mode::cs)), DataError);
  Video flat;
  flat.frames.assign(10, Frame(32, 32, 0.5));
  try {
    run_restore(flat, small_config(Mode::cs));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("peof"), std::string::npos);
  }
}

TEST(Pipeline, CsPeofIsPeofAppliedToCs) {
  const auto& gt = small_scene();
  const RestoreResult cs = run_restore(gt.distorted, small_config(Mode::cs));
  const RestoreResult both = run_restore(gt.distorted, small_config(Mode::cs_peof));
  const Video composed = restore_video_peof(cs.restored, small_config(Mode::peof).flow);
  EXPECT_EQ(both.restored.frames, composed.frames);
  EXPECT_GT(cs.log.valid_trajectories, 0u);
  EXPECT_GT(cs.log.solver_iterations, 0);
  EXPECT_GT(cs.log.lambda, 0.0);
}

TEST(Pipeline, DeterministicAndWritesArtifacts) {
  const auto& gt = small_scene();
  const fs::path dir = temp_dir("run");
  const RestoreResult a = run_restore(gt.distorted, small_config(Mode::cs), dir);
  const RestoreResult b = run_restore(gt.distorted, small_config(Mode::cs));
  EXPECT_EQ(a.log.lambda, b.log.lambda);
  EXPECT_EQ(a.restored.frames, b.restored.frames);
  ASSERT_EQ(a.trajectories.size(), b.trajectories.size());
  for (std::size_t i = 0; i < a.trajectories.size(); ++i) {
    EXPECT_EQ(a.trajectories[i].points.back().x, b.trajectories[i].points.back().x);
  }
  for (const char* f : {"config.json", "trajectories.csv", "solver_log.txt", "field.wmvf", "mean.pgm", "log.txt"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(load_sequence(dir / "restored").size(), 12u);
}

TEST(Pipeline, MotionStatsOnRestoredVideo) {
  const auto& gt = small_scene();
  PipelineConfig c = small_config(Mode::cs);
  const RestoreResult r = run_restore(gt.distorted, c);
  const MotionStats st = motion_stats(r.trajectories, r.restored, c);
  EXPECT_GT(st.matched, 0u);
  EXPECT_GT(st.sigma_motion, 0.5);
  EXPECT_GT(st.mr, 50.0);
}

TEST(Benchmark, EmptyManifestWritesHeaderOnly) {
  const fs::path dir = temp_dir("bench_empty");
  std::ofstream(dir / "m.json") << "{\"scenes\": []}";
  const auto rows = run_benchmark(read_manifest(dir / "m.json"), {Mode::cs}, PipelineConfig{}, dir / "out.csv");
  EXPECT_TRUE(rows.empty());
  std::ifstream is(dir / "out.csv");
  std::string all((std::istreambuf_iterator<char>(is)), {});
  EXPECT_EQ(all, bench_csv_header() + "\n");
}

TEST(Benchmark, OneRowPerSceneAndModeAndFailuresContinue) {
  const fs::path dir = temp_dir("bench");
  const auto& gt = small_scene();
  save_sequence(gt.distorted, dir / "a" / "distorted");
  write_image(gt.clean, dir / "a" / "clean.pgm");
  std::ofstream(dir / "m.json") << R"({"scenes": [
    {"name": "missing", "clean": "nope.pgm", "distorted": "nope"},
    {"name": "a", "clean": "a/clean.pgm", "distorted": "a/distorted"}]})";
  const auto rows =
      run_benchmark(read_manifest(dir / "m.json"), {Mode::cs, Mode::peof}, small_config(Mode::cs), dir / "out.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_NE(rows[0].status, "ok");
  EXPECT_NE(rows[1].status, "ok");
  EXPECT_EQ(rows[2].status, "ok");
  EXPECT_EQ(rows[3].status, "ok");
  EXPECT_GT(rows[2].ssim, 0.0);
  EXPECT_GT(rows[3].sigma_motion, 0.0);
  std::ifstream is(dir / "out.csv");
  int lines = 0;
  for (std::string l; std::getline(is, l);) ++lines;
  EXPECT_EQ(lines, 5);
}
