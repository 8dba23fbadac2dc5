#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "wavecs/imaging.hpp"
#include "wavecs/tracking.hpp"

namespace wavecs {

/// ||restored - truth||_F / ||truth||_F. Throws DataError on an all-zero truth.
double rmse(const Frame& restored, const Frame& truth);

/// Normalized mutual information (H(A) + H(B)) / H(A, B) from a joint
/// histogram over [0, 1] with equal-width bins. Lies in [1, 2].
double nmi(const Frame& a, const Frame& b, int bins = 256);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Mean of the local SSIM map over window positions fully inside the image.
double ssim(const Frame& a, const Frame& b, const SsimParams& params = {});

/// Median over trajectories of ||after - before|| / ||before||, as a
/// percentage. Trajectories are matched by id; an unmatched id throws.
double motion_reduction(std::span<const DisplacementTrajectory> before, std::span<const DisplacementTrajectory> after);

/// sqrt(sum_i sum_t |p_it - cot_i|^2 / (N T - 1)) over valid trajectories.
double sigma_motion(std::span<const Trajectory> trajs);

struct QualityReport {
  double rmse = 0.0;
  double nmi = 0.0;
  double ssim = 0.0;
  std::map<std::string, std::string> details;

  std::string to_text() const;  // key=value lines
  static std::string csv_header();
  std::string to_csv_row() const;
};

/// Scores `restored` against `truth` with the default parameters.
QualityReport evaluate_quality(const Frame& restored, const Frame& truth);

}  // namespace wavecs
