#include "wavecs/cs_mvf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "wavecs/error.hpp"
#include "wavecs/parallel.hpp"
#include "wavecs/simd/kernels.hpp"

namespace wavecs {
namespace {

const double* as_reals(const cplx* z) { return reinterpret_cast<const double*>(z); }
double* as_reals(cplx* z) { return reinterpret_cast<double*>(z); }

double objective(const simd::KernelTable& k, double lambda, std::span<const cplx> theta, std::span<const cplx> e,
                 std::span<const cplx> a_theta) {
  return lambda * k.l1_norm(theta.data(), theta.size()) +
         k.squared_distance(as_reals(e.data()), as_reals(a_theta.data()), 2 * e.size());
}

SamplingPlan subset(const SamplingPlan& plan, std::span<const std::size_t> rows) {
  SamplingPlan out;
  out.dims = plan.dims;
  out.downsample = plan.downsample;
  out.sites.reserve(rows.size());
  out.measurements.reserve(rows.size());
  for (std::size_t r : rows) {
    out.sites.push_back(plan.sites[r]);
    out.measurements.push_back(plan.measurements[r]);
  }
  return out;
}

}  // namespace

std::size_t SamplingPlan::distinct_nodes() const {
  std::set<std::size_t> nodes;
  const std::size_t ps = dims.plane_size();
  for (std::size_t s : sites) nodes.insert(s % ps);
  return nodes.size();
}

std::vector<double> SolverParams::default_lambda_grid() {
  std::vector<double> g(8);
  for (int i = 0; i < 8; ++i) g[i] = std::pow(10.0, -4.0 + 3.0 * i / 7.0);
  return g;
}

void validate(const SolverParams& p) {
  if (!(p.lambda >= 0) || !std::isfinite(p.lambda)) throw UsageError("lambda must be a finite value >= 0");
  if (p.max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (!(p.tol > 0)) throw UsageError("tol must be > 0");
  if (p.downsample < 1) throw UsageError("downsample must be >= 1");
  if (!(p.cv_holdout > 0 && p.cv_holdout < 1)) throw UsageError("cv_holdout must lie in (0, 1)");
  for (double g : p.lambda_grid) {
    if (!(g > 0) || !std::isfinite(g)) throw UsageError("lambda grid values must be positive");
  }
}

GridDims coarse_dims(GridDims full, int ds) {
  if (ds < 1) throw UsageError("downsample must be >= 1");
  return {(full.nx + ds - 1) / ds, (full.ny + ds - 1) / ds, full.nt};
}

SamplingPlan build_plan(std::span<const DisplacementTrajectory> dts, GridDims full, int downsample,
                        std::size_t min_sites) {
  if (full.nx < 1 || full.ny < 1 || full.nt < 1) throw DataError("build_plan: empty grid");
  SamplingPlan plan;
  plan.dims = coarse_dims(full, downsample);
  plan.downsample = downsample;
  const double c = 0.5 * (downsample - 1);

  // node -> (per-frame sums, count)
  std::map<std::size_t, std::pair<std::vector<cplx>, int>> nodes;
  for (const DisplacementTrajectory& dt : dts) {
    if (static_cast<int>(dt.offsets.size()) != full.nt) {
      throw DataError("build_plan: trajectory " + std::to_string(dt.id) + " has " +
                      std::to_string(dt.offsets.size()) + " frames, expected " + std::to_string(full.nt));
    }
    if (!std::isfinite(dt.anchor.x) || !std::isfinite(dt.anchor.y)) {
      throw DataError("build_plan: trajectory " + std::to_string(dt.id) + " has a non-finite anchor");
    }
    const int ix = std::clamp(static_cast<int>(std::lround((dt.anchor.x - c) / downsample)), 0, plan.dims.nx - 1);
    const int iy = std::clamp(static_cast<int>(std::lround((dt.anchor.y - c) / downsample)), 0, plan.dims.ny - 1);
    auto& [sum, count] = nodes[static_cast<std::size_t>(iy) * plan.dims.nx + ix];
    sum.resize(full.nt);
    for (int t = 0; t < full.nt; ++t) {
      const Displacement2 d = dt.offsets[t];
      if (!std::isfinite(d.dx) || !std::isfinite(d.dy)) {
        throw DataError("build_plan: trajectory " + std::to_string(dt.id) + " has a non-finite offset");
      }
      sum[t] += cplx(d.dx, d.dy);
    }
    ++count;
  }
  if (nodes.size() < min_sites) {
    throw DataError("build_plan: only " + std::to_string(nodes.size()) + " distinct sampling sites (need " +
                    std::to_string(min_sites) + "); track more points or lower downsample");
  }
  const std::size_t ps = plan.dims.plane_size();
  for (int t = 0; t < full.nt; ++t) {
    for (const auto& [node, acc] : nodes) {
      plan.sites.push_back(static_cast<std::size_t>(t) * ps + node);
      plan.measurements.push_back(acc.first[t] / static_cast<double>(acc.second));
    }
  }
  return plan;
}

SampledDft::SampledDft(GridDims dims, std::vector<std::size_t> sites)
    : fft_(dims), sites_(std::move(sites)), buffer_(dims.size()) {
  for (std::size_t s : sites_) {
    if (s >= buffer_.size()) throw DataError("sampling site outside the grid");
  }
}

void SampledDft::forward(std::span<const cplx> theta, std::span<cplx> out) {
  fft_.synthesize(theta, buffer_);
  for (std::size_t i = 0; i < sites_.size(); ++i) out[i] = buffer_[sites_[i]];
}

void SampledDft::adjoint(std::span<const cplx> residual, std::span<cplx> theta_out) {
  std::fill(buffer_.begin(), buffer_.end(), cplx{});
  for (std::size_t i = 0; i < sites_.size(); ++i) buffer_[sites_[i]] += residual[i];
  fft_.analyze(buffer_, theta_out);
}

std::vector<cplx> forward(const CoeffVolume& theta, const SamplingPlan& plan) {
  if (!(theta.dims == plan.dims)) throw UsageError("forward: coefficient grid does not match the plan");
  SampledDft op(plan.dims, plan.sites);
  std::vector<cplx> out(plan.size());
  op.forward(theta.values, out);
  return out;
}

CoeffVolume adjoint(std::span<const cplx> residual, const SamplingPlan& plan) {
  if (residual.size() != plan.size()) throw UsageError("adjoint: residual length does not match the plan");
  SampledDft op(plan.dims, plan.sites);
  CoeffVolume out(plan.dims);
  op.adjoint(residual, out.values);
  return out;
}

double lambda_scale(const SamplingPlan& plan) {
  const CoeffVolume g = adjoint(plan.measurements, plan);
  double m = 0.0;
  for (const cplx& v : g.values) m = std::max(m, std::abs(v));
  return m;
}

double coherence(const SamplingPlan& plan) {
  const std::size_t n = plan.dims.size();
  if (n > 4096) throw UsageError("coherence: grid too large for the brute-force check");
  Fft3 fft(plan.dims);
  std::vector<cplx> atom(n), field(n);
  double best = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(atom.begin(), atom.end(), cplx{});
    atom[j] = 1.0;
    fft.synthesize(atom, field);
    for (std::size_t s : plan.sites) best = std::max(best, std::abs(field[s]));
  }
  return std::sqrt(static_cast<double>(n)) * best;
}

LassoResult solve_lasso(const SamplingPlan& plan, const SolverParams& params, const CoeffVolume* warm_start) {
  validate(params);
  if (plan.sites.empty()) throw DataError("solve_lasso: no measurements");
  if (plan.measurements.size() != plan.sites.size()) throw DataError("solve_lasso: malformed plan");
  for (const cplx& e : plan.measurements) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) throw DataError("solve_lasso: non-finite measurement");
  }
  if (warm_start && !(warm_start->dims == plan.dims)) throw UsageError("solve_lasso: warm start has the wrong grid");

  const auto& k = simd::kernels();
  const std::size_t n = plan.dims.size();
  const std::size_t m = plan.size();
  const double lambda = params.lambda;
  const std::span<const cplx> e = plan.measurements;
  SampledDft op(plan.dims, plan.sites);

  LassoResult res;
  res.theta = warm_start ? *warm_start : CoeffVolume(plan.dims);
  std::vector<cplx>& theta = res.theta.values;
  std::vector<cplx> y = theta, z(n), prev(n);
  std::vector<cplx> a_theta(m), a_y(m), a_z(m), r(m);
  op.forward(theta, a_theta);
  a_y = a_theta;
  double J = objective(k, lambda, theta, e, a_theta);
  if (!std::isfinite(J)) throw NumericalError("solve_lasso: non-finite initial objective");
  double t = 1.0;
  bool restarted = false;

  for (int it = 1; it <= params.max_iters; ++it) {
    for (std::size_t i = 0; i < m; ++i) r[i] = e[i] - a_y[i];
    op.adjoint(r, z);
    for (std::size_t i = 0; i < n; ++i) z[i] += y[i];
    k.soft_threshold(z.data(), 0.5 * lambda, z.data(), n);
    op.forward(z, a_z);
    const double Jz = objective(k, lambda, z, e, a_z);
    if (!std::isfinite(Jz)) throw NumericalError("solve_lasso: objective became non-finite at iteration " + std::to_string(it));
    res.iterations = it;

    if (Jz > J) {
      // A plain proximal step from an accepted iterate cannot increase J, so
      // a second rejection in a row only happens at round-off level.
      if (restarted) {
        res.converged = true;
        break;
      }
      // Momentum overshot: restart from the last accepted iterate.
      restarted = true;
      t = 1.0;
      y = theta;
      a_y = a_theta;
      res.log.push_back({it, J, 0.0, true});
      continue;
    }
    restarted = false;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    k.extrapolate(as_reals(z.data()), as_reals(theta.data()), beta, as_reals(y.data()), 2 * n);
    k.extrapolate(as_reals(a_z.data()), as_reals(a_theta.data()), beta, as_reals(a_y.data()), 2 * m);
    std::swap(theta, z);
    std::swap(a_theta, a_z);
    t = t_next;
    const double rel = (J - Jz) / std::max(J, 1e-300);
    J = Jz;
    res.log.push_back({it, J, rel, false});
    if (rel < params.tol) {
      res.converged = true;
      break;
    }
  }
  res.objective = J;
  return res;
}

CrossValidation cross_validate(const SamplingPlan& plan, const SolverParams& params) {
  validate(params);
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = plan.size();
  if (m < 20) throw DataError("cross_validate: need at least 20 measurements, have " + std::to_string(m));
  if (params.lambda_grid.empty()) throw UsageError("cross_validate: empty lambda grid");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(params.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_hold = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(params.cv_holdout * static_cast<double>(m))), 1, m - 1);
  std::vector<std::size_t> hold(order.begin(), order.begin() + n_hold);
  std::vector<std::size_t> fit(order.begin() + n_hold, order.end());
  std::sort(hold.begin(), hold.end());
  std::sort(fit.begin(), fit.end());
  const SamplingPlan fit_plan = subset(plan, fit);
  const SamplingPlan hold_plan = subset(plan, hold);
  SampledDft hold_op(plan.dims, hold_plan.sites);

  CrossValidation cv;
  const double scale = lambda_scale(fit_plan);
  cv.grid = params.lambda_grid;
  for (double& g : cv.grid) g *= scale;
  std::sort(cv.grid.begin(), cv.grid.end());
  cv.errors.assign(cv.grid.size(), 0.0);

  // Descending path with warm starts.
  SolverParams p = params;
  CoeffVolume warm(plan.dims);
  std::vector<cplx> pred(hold_plan.size());
  std::size_t best = cv.grid.size();
  for (std::size_t gi = cv.grid.size(); gi-- > 0;) {
    p.lambda = cv.grid[gi];
    LassoResult r = solve_lasso(fit_plan, p, &warm);
    hold_op.forward(r.theta.values, pred);
    double err = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) err += std::norm(hold_plan.measurements[i] - pred[i]);
    cv.errors[gi] = err;
    if (best == cv.grid.size() || err < cv.errors[best]) best = gi;
    warm = std::move(r.theta);
  }
  cv.lambda = cv.grid[best];
  p.lambda = cv.lambda;
  cv.fit = solve_lasso(plan, p, &warm);
  cv.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cv;
}

MotionField reconstruct_field(const CoeffVolume& theta, GridDims full, int downsample) {
  if (!(theta.dims == coarse_dims(full, downsample))) {
    throw UsageError("reconstruct_field: coefficient grid does not match the frame grid and downsample");
  }
  std::vector<cplx> coarse(theta.dims.size());
  {
    Fft3 fft(theta.dims);
    fft.synthesize(theta.values, coarse);
  }
  MotionField out(full);
  if (downsample == 1) {
    out.values() = std::move(coarse);
    out.check_finite();
    return out;
  }
  const GridDims cd = theta.dims;
  const double c = 0.5 * (downsample - 1);
  // Precompute per-axis bilinear indices and weights.
  struct Tap {
    int i0, i1;
    double f;
  };
  auto taps = [&](int n_full, int n_coarse) {
    std::vector<Tap> v(n_full);
    for (int p = 0; p < n_full; ++p) {
      const double u = std::clamp((p - c) / downsample, 0.0, static_cast<double>(n_coarse - 1));
      const int i0 = std::min(static_cast<int>(std::floor(u)), std::max(n_coarse - 2, 0));
      const int i1 = std::min(i0 + 1, n_coarse - 1);
      v[p] = {i0, i1, u - i0};
    }
    return v;
  };
  const std::vector<Tap> tx = taps(full.nx, cd.nx);
  const std::vector<Tap> ty = taps(full.ny, cd.ny);
  parallel_for(0, static_cast<std::size_t>(full.nt), [&](std::size_t ti) {
    const int t = static_cast<int>(ti);
    for (int y = 0; y < full.ny; ++y) {
      const Tap& a = ty[y];
      const cplx* r0 = coarse.data() + cd.index(0, a.i0, t);
      const cplx* r1 = coarse.data() + cd.index(0, a.i1, t);
      cplx* dst = out.values().data() + full.index(0, y, t);
      for (int x = 0; x < full.nx; ++x) {
        const Tap& b = tx[x];
        const cplx top = (1 - b.f) * r0[b.i0] + b.f * r0[b.i1];
        const cplx bot = (1 - b.f) * r1[b.i0] + b.f * r1[b.i1];
        dst[x] = (1 - a.f) * top + a.f * bot;
      }
    }
  });
  out.check_finite();
  return out;
}

Video restore_video_cs(const Video& video, const MotionField& field) {
  check_video(video, 1);
  const GridDims d = field.dims();
  if (d.nx != video.width() || d.ny != video.height() || d.nt != static_cast<int>(video.size())) {
    throw UsageError("restore_video_cs: field and video dimensions differ");
  }
  Video out;
  out.fps = video.fps;
  out.frames.reserve(video.size());
  for (int t = 0; t < d.nt; ++t) out.frames.push_back(warp(video.frames[t], field.slice(t)));
  return out;
}

double fourier_support_fraction(const MotionField& field, double energy) {
  if (!(energy > 0 && energy <= 1)) throw UsageError("energy fraction must lie in (0, 1]");
  const std::size_t n = field.dims().size();
  if (n == 0) throw DataError("empty field");
  std::vector<cplx> coeffs(n);
  {
    Fft3 fft(field.dims());
    fft.analyze(field.values(), coeffs);
  }
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::norm(coeffs[i]);
  coeffs.clear();
  coeffs.shrink_to_fit();
  const double total = std::accumulate(mag.begin(), mag.end(), 0.0);
  if (!(total > 0)) return 0.0;
  std::sort(mag.begin(), mag.end(), std::greater<>());
  double acc = 0.0;
  std::size_t count = 0;
  while (count < n && acc < energy * total) acc += mag[count++];
  return static_cast<double>(count) / static_cast<double>(n);
}

void write_iteration_log(const LassoResult& result, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os.precision(12);
  os << "# iteration objective relative_change restarted\n";
  for (const IterationRecord& r : result.log) {
    os << r.iteration << ' ' << r.objective << ' ' << r.relative_change << ' ' << (r.restarted ? 1 : 0) << '\n';
  }
  if (!os) throw DataError("write failed: " + path.string());
}

}  // namespace wavecs
