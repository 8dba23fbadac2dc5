#pragma once

// Compressed-sensing reconstruction of the dense motion field.
//
// Tracked displacement trajectories sample the complex field d = dx + i dy
// at a few space-time sites. With F the unitary inverse 3-D DFT and Phi the
// row-selection operator for the sampled sites, the measurements satisfy
// e = Phi F theta + noise, and theta is recovered by the LASSO
//
//   J(theta) = lambda ||theta||_1 + ||e - Phi F theta||^2,
//
// where ||.||_1 sums complex magnitudes. The solve runs on a grid coarsened
// spatially by `downsample`; the field is then synthesized and bilinearly
// upsampled back to the frame size.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "wavecs/fft3.hpp"
#include "wavecs/motion_field.hpp"
#include "wavecs/tracking.hpp"

namespace wavecs {

using cplx = std::complex<double>;

struct CoeffVolume {
  GridDims dims;
  std::vector<cplx> values;

  CoeffVolume() = default;
  explicit CoeffVolume(GridDims d) : dims(d), values(d.size()) {}
};

struct SamplingPlan {
  GridDims dims;                   // grid the sites index into
  int downsample = 1;              // spatial factor from the frame grid
  std::vector<std::size_t> sites;  // flat indices, dims.index(x, y, t); unique
  std::vector<cplx> measurements;  // dx + i dy per site

  std::size_t size() const noexcept { return sites.size(); }
  /// Number of distinct spatial nodes covered.
  std::size_t distinct_nodes() const;
};

struct SolverParams {
  double lambda = 0.0;
  int max_iters = 2000;
  double tol = 1e-6;  // relative objective change
  int downsample = 8;
  double cv_holdout = 0.10;
  /// Candidate lambdas as multiples of ||adjoint(e)||_inf.
  std::vector<double> lambda_grid = default_lambda_grid();
  std::uint64_t seed = 0;

  static std::vector<double> default_lambda_grid();
};

/// Throws UsageError when the parameters violate their invariants.
void validate(const SolverParams& params);

/// Coarse grid for a frame grid: ceil(W / ds) x ceil(H / ds) x T. Coarse
/// node i sits at frame pixel i * ds + (ds - 1) / 2 (block centers).
GridDims coarse_dims(GridDims full, int downsample);

/// Maps displacement trajectories to measurements on the coarse grid. Each
/// anchor is rounded to its nearest coarse node; trajectories sharing a node
/// are averaged per frame. Throws DataError with fewer than min_sites
/// distinct nodes.
SamplingPlan build_plan(std::span<const DisplacementTrajectory> dts, GridDims full, int downsample,
                        std::size_t min_sites = 8);

/// The measurement operator Phi F and its adjoint F^H Phi^T.
class SampledDft {
 public:
  SampledDft(GridDims dims, std::vector<std::size_t> sites);

  const GridDims& dims() const noexcept { return fft_.dims(); }
  std::size_t rows() const noexcept { return sites_.size(); }

  void forward(std::span<const cplx> theta, std::span<cplx> out);
  void adjoint(std::span<const cplx> residual, std::span<cplx> theta_out);

 private:
  Fft3 fft_;
  std::vector<std::size_t> sites_;
  std::vector<cplx> buffer_;
};

std::vector<cplx> forward(const CoeffVolume& theta, const SamplingPlan& plan);
CoeffVolume adjoint(std::span<const cplx> residual, const SamplingPlan& plan);

/// ||adjoint(e)||_inf, the smallest lambda with an all-zero LASSO solution (times 2).
double lambda_scale(const SamplingPlan& plan);

/// sqrt(n) * max |<Phi^i, F_j>| / (||Phi^i|| ||F_j||) by brute force over all
/// basis columns. Only for small grids (n <= 4096).
double coherence(const SamplingPlan& plan);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double relative_change = 0.0;
  bool restarted = false;
};

struct LassoResult {
  CoeffVolume theta;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  std::vector<IterationRecord> log;
};

/// Accelerated proximal gradient (FISTA) with function-value restart, so the
/// logged objective never increases. Step 1/2 matches the Lipschitz constant
/// 2 of the quadratic term; the prox is complex soft-thresholding at lambda/2.
/// Throws NumericalError if the objective becomes non-finite.
LassoResult solve_lasso(const SamplingPlan& plan, const SolverParams& params, const CoeffVolume* warm_start = nullptr);

struct CrossValidation {
  double lambda = 0.0;
  std::vector<double> grid;      // absolute candidates, ascending
  std::vector<double> errors;    // held-out squared error per candidate
  LassoResult fit;               // refit on all measurements
  double seconds = 0.0;
};

/// Holds out a random cv_holdout fraction of the scalar measurements, fits
/// each candidate on the rest, keeps the lambda with the smallest held-out
/// error and refits on everything. Deterministic in params.seed.
CrossValidation cross_validate(const SamplingPlan& plan, const SolverParams& params);

/// Synthesizes the coarse field and upsamples each frame bilinearly to
/// full.nx x full.ny (block-center node positions, clamp at the edges).
MotionField reconstruct_field(const CoeffVolume& theta, GridDims full, int downsample);

/// I_r(x, y, t) = I_d(x + dx(x, y, t), y + dy(x, y, t), t).
Video restore_video_cs(const Video& video, const MotionField& field);

/// Fraction of 3-D DFT bins needed to hold `energy` of the field's squared magnitude.
double fourier_support_fraction(const MotionField& field, double energy = 0.99);

void write_iteration_log(const LassoResult& result, const std::filesystem::path& path);

}  // namespace wavecs
