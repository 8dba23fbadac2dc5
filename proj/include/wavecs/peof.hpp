#pragma once

// Dense optical flow by polynomial expansion. Each neighbourhood is fitted
// with f(x) ~ x^T A x + b^T x + c under a Gaussian applicability; the shift
// between two frames follows from how b changes while A stays put. Used as a
// standalone restorer and as a refinement after the CS stage.

#include <vector>

#include "wavecs/imaging.hpp"

namespace wavecs {

struct PolyExpansion {
  // Coefficients of 1, x, y, x^2, y^2, xy per pixel.
  Plane c, bx, by, axx, ayy, axy;
};

struct FlowParams {
  int levels = 3;
  double pyr_scale = 0.5;
  int iterations = 10;
  int poly_window = 11;
  double poly_sigma = 1.5;
  int avg_window = 15;
  double min_eigenvalue = 1e-9;
};

/// Throws UsageError on invalid parameters.
void validate(const FlowParams& params);

/// Weighted least-squares quadratic fit around every pixel (window x window,
/// Gaussian weights of width sigma, clamp-to-edge outside the image).
PolyExpansion poly_expand(const Plane& img, int window, double sigma);
PolyExpansion poly_expand(const Frame& frame, int window, double sigma);

/// One refinement of `prior`. `moved` is the expansion of the second frame
/// already warped by `prior`. Pixels whose averaged system is singular keep
/// the prior.
FlowField flow_step(const PolyExpansion& ref, const PolyExpansion& moved, const FlowField& prior,
                    const FlowParams& params);

/// Flow d with to(x + d(x)) ~ from(x), coarse to fine.
FlowField estimate_flow(const Frame& from, const Frame& to, const FlowParams& params);

/// Registers every frame to the temporal mean (and, with outer_iters > 1,
/// to the mean of the previous pass). Flows are returned through `flows` when given.
Video restore_video_peof(const Video& video, const FlowParams& params, int outer_iters = 1,
                         std::vector<FlowField>* flows = nullptr);

}  // namespace wavecs
