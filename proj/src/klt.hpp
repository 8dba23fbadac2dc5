#pragma once

#include <vector>

#include "wavecs/tracking.hpp"

namespace wavecs::klt {

struct Level {
  Plane img;
  Plane gx;
  Plane gy;
};

using Pyramid = std::vector<Level>;

/// Level 0 is the input; each further level is blurred with the binomial
/// 5-tap kernel and decimated by two. Gradients use the Scharr operator.
Pyramid build_pyramid(const Frame& frame, int levels);

struct Result {
  Point2 pos;
  bool ok = false;
  double residual = 0.0;   // RMS mismatch at level 0
  double min_eig = 0.0;    // of G / window area at level 0
};

/// Translational Lucas-Kanade, coarse to fine. guess is the expected
/// displacement in level-0 pixels.
Result track_point(const Pyramid& prev, const Pyramid& next, Point2 pt, Displacement2 guess,
                   const TrackerParams& params);

}  // namespace wavecs::klt
