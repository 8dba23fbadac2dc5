#pragma once

// End-to-end restoration: track -> reject -> displacement trajectories ->
// CS field reconstruction -> warp, optionally followed by optical-flow
// registration, then temporal aggregation. Also the evaluation helpers and
// the benchmark harness used by the CLI.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavecs/cs_mvf.hpp"
#include "wavecs/metrics.hpp"
#include "wavecs/peof.hpp"
#include "wavecs/tracking.hpp"

namespace wavecs {

enum class Mode { cs, peof, cs_peof };
enum class Aggregation { mean, median };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);
Aggregation aggregation_from_string(const std::string& s);
std::string to_string(Aggregation a);

struct PipelineConfig {
  Mode mode = Mode::cs_peof;
  Aggregation aggregation = Aggregation::mean;
  AnchorMode anchor = AnchorMode::mean;
  DetectorParams detector = default_detector();
  TrackerParams tracker;
  SolverParams solver;
  FlowParams flow;
  bool cross_validate = true;
  double lambda_rel = 1e-3;  // lambda / ||adjoint(e)||_inf when not cross-validating
  int peof_passes = 1;
  std::size_t min_sites = 8;
  std::uint64_t seed = 0;

  static DetectorParams default_detector();
};

/// Throws UsageError on any invalid sub-parameter.
void validate(const PipelineConfig& cfg);

/// JSON with the same field names; absent keys keep their defaults and
/// unknown keys are rejected.
PipelineConfig config_from_json(const std::string& text);
std::string config_to_json(const PipelineConfig& cfg);

struct RestoreLog {
  std::size_t tracked_points = 0;
  std::size_t valid_trajectories = 0;
  std::size_t rejected_klt = 0;
  std::size_t rejected_cot_split = 0;
  int solver_iterations = 0;
  bool solver_converged = false;
  double lambda = 0.0;
  double cv_seconds = 0.0;  // not included in the stage times
  std::vector<std::pair<std::string, double>> stage_seconds;

  double total_seconds() const;  // excludes cross-validation
  std::string to_text() const;
};

struct RestoreResult {
  Video restored;
  Frame mean_image;
  RestoreLog log;
  std::vector<Trajectory> trajectories;  // empty in peof mode
  std::optional<MotionField> field;
  std::vector<IterationRecord> solver_log;
};

/// Runs the configured mode. With run_dir set, stage artifacts are written there.
RestoreResult run_restore(const Video& video, const PipelineConfig& cfg,
                          const std::optional<std::filesystem::path>& run_dir = std::nullopt);

/// Detects seeds in frame 0 and tracks them.
std::vector<Trajectory> track_video(const Video& video, const PipelineConfig& cfg);

struct MotionStats {
  double mr = 0.0;            // percent
  double sigma_motion = 0.0;  // px, of the input trajectories
  std::size_t matched = 0;
};

/// Re-tracks `restored` from the COTs of the valid input trajectories and
/// compares displacement trajectories of the points valid in both.
MotionStats motion_stats(const std::vector<Trajectory>& distorted_tracks, const Video& restored,
                         const PipelineConfig& cfg);

Frame aggregate(const Video& video, Aggregation how);

struct BenchScene {
  std::string name;
  std::filesystem::path clean;      // image
  std::filesystem::path distorted;  // frame directory
};

/// JSON: {"scenes": [{"name": ..., "clean": ..., "distorted": ...}, ...]}.
/// Relative paths are resolved against the manifest directory.
std::vector<BenchScene> read_manifest(const std::filesystem::path& path);

struct BenchRow {
  std::string scene;
  std::string mode;
  double time_s = 0.0;
  double cv_time_s = 0.0;
  double nmi = 0.0;
  double ssim = 0.0;
  double rmse = 0.0;
  double mr = 0.0;
  double sigma_motion = 0.0;
  std::string status = "ok";
};

std::string bench_csv_header();
std::string to_csv(const BenchRow& row);

/// One row per (scene, mode). A failing scene is recorded in its status
/// column and the run continues. Rows are also appended to `csv` as they finish.
std::vector<BenchRow> run_benchmark(const std::vector<BenchScene>& scenes, const std::vector<Mode>& modes,
                                    const PipelineConfig& cfg, const std::filesystem::path& csv,
                                    const std::optional<std::filesystem::path>& work_dir = std::nullopt);

}  // namespace wavecs
