#pragma once

// Salient-point detection, pyramidal KLT tracking, trajectory rejection and
// conversion to displacement trajectories anchored at the center of
// trajectory (COT, the temporal mean position).

#include <filesystem>
#include <span>
#include <vector>

#include "wavecs/imaging.hpp"

namespace wavecs {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct Feature {
  double x = 0.0;
  double y = 0.0;
  double response = 0.0;  // Harris response at the detection, shared scale for both detectors
};

struct DetectorParams {
  double harris_k = 0.04;
  double harris_quality = 0.01;    // keep responses above this fraction of the frame maximum
  double harris_sigma = 1.0;       // structure-tensor integration scale
  double fast_threshold = 20.0 / 255.0;
  double dedupe_radius = 2.0;      // union suppression radius, stronger response wins
  int border = 4;                  // no detections closer than this to the frame edge
  int max_features = 0;            // 0 = no cap; otherwise keep the strongest
};

std::vector<Feature> harris_corners(const Frame& frame, const DetectorParams& params = {});
std::vector<Feature> fast_keypoints(const Frame& frame, const DetectorParams& params = {});

/// Union of Harris corners and FAST-9 keypoints, subpixel refined and
/// deduplicated. Deterministic for a given frame and parameters.
std::vector<Feature> detect_features(const Frame& frame, const DetectorParams& params = {});

enum class RejectReason { none, klt, cot_split };

struct Trajectory {
  int id = 0;
  std::vector<Point2> points;  // one per frame; frozen at the last good position after a KLT failure
  bool valid = true;
  RejectReason reason = RejectReason::none;
  int failed_at = -1;  // first frame the tracker could not follow, or -1
};

struct TrackerParams {
  int window = 31;               // odd
  double weight_sigma = 4.0;     // px, Gaussian window weighting; <= 0 is uniform
  int levels = 3;
  int max_iterations = 30;       // per pyramid level
  double epsilon = 0.01;         // px, update size that ends the iteration
  double min_eigenvalue = 1e-5;  // of the window gradient matrix divided by window area
  double max_residual = 0.08;    // RMS intensity mismatch at the finest level
  double max_fb_error = 1.0;     // forward-backward distance, px; <= 0 disables the check
  double cot_split_threshold = 3.0;  // px, first-half vs second-half COT
};

/// Tracks every seed from frame 0 through the whole video. Trajectories that
/// fail the KLT checks or the COT split rule are marked invalid.
std::vector<Trajectory> track(const Video& video, std::span<const Point2> seeds, const TrackerParams& params = {});

/// Distance between the COT of the first floor(T/2) frames and the COT of
/// the last floor(T/2) frames.
double cot_split_distance(const Trajectory& traj);

/// Marks valid trajectories whose COT split distance exceeds the threshold.
/// Returns the number newly rejected.
int apply_cot_split_rule(std::vector<Trajectory>& trajs, double threshold);

struct DisplacementTrajectory {
  int id = 0;
  Point2 anchor;
  std::vector<Displacement2> offsets;  // points[t] - anchor
};

enum class AnchorMode { mean, median };

/// Throws DataError for an invalid or empty trajectory.
DisplacementTrajectory to_displacement(const Trajectory& traj, AnchorMode mode = AnchorMode::mean);

std::vector<DisplacementTrajectory> to_displacements(std::span<const Trajectory> trajs,
                                                     AnchorMode mode = AnchorMode::mean);

/// Delimited text export: header "point_id,t,x,y,valid", one row per (point, frame).
void write_trajectories_csv(std::span<const Trajectory> trajs, const std::filesystem::path& path);
std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path);

}  // namespace wavecs
