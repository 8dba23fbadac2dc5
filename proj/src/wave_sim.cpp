#include "wavecs/wave_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <tuple>

#include "json.hpp"
#include "wavecs/error.hpp"
#include "wavecs/parallel.hpp"

namespace wavecs {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct WaveTerms {
  double gx = 0, gy = 0;                // alpha * grad z
  double jxx = 0, jxy = 0, jyy = 0;     // alpha * Hessian z
};

WaveTerms evaluate(const SurfaceModel& model, double x, double y, double t) {
  WaveTerms r;
  for (const SineWave& w : model.waves) {
    const double arg = w.kx * x + w.ky * y + w.omega * t + w.phase;
    const double c = std::cos(arg);
    const double s = std::sin(arg);
    r.gx += w.amplitude * w.kx * c;
    r.gy += w.amplitude * w.ky * c;
    r.jxx -= w.amplitude * w.kx * w.kx * s;
    r.jxy -= w.amplitude * w.kx * w.ky * s;
    r.jyy -= w.amplitude * w.ky * w.ky * s;
  }
  const double a = model.depth_gain;
  r.gx *= a;
  r.gy *= a;
  r.jxx *= a;
  r.jxy *= a;
  r.jyy *= a;
  return r;
}

}  // namespace

double depth_gain_for_depth(double depth_px, double refractive_index) {
  return depth_px * (1.0 - 1.0 / refractive_index);
}

void validate(const SurfaceModel& model) {
  if (model.waves.empty()) throw UsageError("surface model needs at least one wave");
  if (!std::isfinite(model.depth_gain)) throw UsageError("depth gain must be finite");
  for (const SineWave& w : model.waves) {
    if (!(w.amplitude > 0) || !std::isfinite(w.amplitude)) throw UsageError("wave amplitude must be positive");
    if (!(std::hypot(w.kx, w.ky) > 0)) throw UsageError("wavevector must be non-zero");
    if (!std::isfinite(w.omega) || !std::isfinite(w.phase)) throw UsageError("wave parameters must be finite");
  }
}

double surface_height(const SurfaceModel& model, double x, double y, double t) {
  double z = 0.0;
  for (const SineWave& w : model.waves) z += w.amplitude * std::sin(w.kx * x + w.ky * y + w.omega * t + w.phase);
  return z;
}

Displacement2 surface_displacement(const SurfaceModel& model, double x, double y, double t) {
  double gx = 0.0;
  double gy = 0.0;
  for (const SineWave& w : model.waves) {
    const double c = w.amplitude * std::cos(w.kx * x + w.ky * y + w.omega * t + w.phase);
    gx += w.kx * c;
    gy += w.ky * c;
  }
  return {model.depth_gain * gx, model.depth_gain * gy};
}

MotionField displacement_field(const SurfaceModel& model, int width, int height, int frames) {
  MotionField field(GridDims{width, height, frames});
  parallel_for(0, static_cast<std::size_t>(frames), [&](std::size_t t) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const Displacement2 d = surface_displacement(model, x, y, static_cast<double>(t));
        field(x, y, static_cast<int>(t)) = {d.dx, d.dy};
      }
    }
  });
  return field;
}

Displacement2 inverse_displacement(const SurfaceModel& model, double x, double y, double t) {
  // Start from the first-order guess p = x - d(x), then Newton on
  // F(p) = p + d(p) - x with Jacobian I + alpha * Hess z.
  const WaveTerms first = evaluate(model, x, y, t);
  double px = x - first.gx;
  double py = y - first.gy;
  for (int it = 0; it < 20; ++it) {
    const WaveTerms w = evaluate(model, px, py, t);
    const double fx = px + w.gx - x;
    const double fy = py + w.gy - y;
    if (std::abs(fx) + std::abs(fy) < 1e-12) break;
    const double a = 1.0 + w.jxx;
    const double b = w.jxy;
    const double d = 1.0 + w.jyy;
    const double det = a * d - b * b;
    if (std::abs(det) < 1e-6) {
      // Near a fold; fall back to a damped fixed-point step.
      px -= 0.5 * fx;
      py -= 0.5 * fy;
      continue;
    }
    px -= (d * fx - b * fy) / det;
    py -= (a * fy - b * fx) / det;
  }
  return {px - x, py - y};
}

double analytic_rms_displacement(const SurfaceModel& model) {
  double s = 0.0;
  for (const SineWave& w : model.waves) {
    s += 0.5 * w.amplitude * w.amplitude * (w.kx * w.kx + w.ky * w.ky);
  }
  return std::abs(model.depth_gain) * std::sqrt(s);
}

double max_distortion_slope(const SurfaceModel& model) {
  double s = 0.0;
  for (const SineWave& w : model.waves) s += w.amplitude * (w.kx * w.kx + w.ky * w.ky);
  return std::abs(model.depth_gain) * s;
}

SurfaceModel random_model(std::uint64_t seed, int num_waves, double target_sigma_motion,
                          const RandomModelOptions& opt) {
  if (num_waves < 1) throw UsageError("random_model: need at least one wave");
  if (!(target_sigma_motion > 0)) throw UsageError("random_model: target sigma must be positive");
  if (!(opt.min_wavelength > 0) || opt.max_wavelength < opt.min_wavelength) {
    throw UsageError("random_model: bad wavelength range");
  }
  if (opt.min_temporal_cycles < 1 || opt.max_temporal_cycles < opt.min_temporal_cycles) {
    throw UsageError("random_model: bad temporal cycle range");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> cycles(opt.min_temporal_cycles, opt.max_temporal_cycles);

  SurfaceModel best;
  double best_slope = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < 200; ++attempt) {
    SurfaceModel model;
    model.depth_gain = depth_gain_for_depth(opt.depth_px);
    std::set<std::tuple<int, int, int>> used;
    int guard = 0;
    while (static_cast<int>(model.waves.size()) < num_waves) {
      if (++guard > 10000) throw UsageError("random_model: cannot draw distinct waves in the given ranges");
      const double wavelength = opt.min_wavelength + unit(rng) * (opt.max_wavelength - opt.min_wavelength);
      const double direction = kTwoPi * unit(rng);
      const int c = cycles(rng);
      const double phase = kTwoPi * unit(rng);
      const double raw_amp = 0.5 + 0.5 * unit(rng);
      SineWave w;
      w.phase = phase;
      w.amplitude = raw_amp;
      if (opt.commensurate) {
        const int m = static_cast<int>(std::lround(opt.width * std::cos(direction) / wavelength));
        const int n = static_cast<int>(std::lround(opt.height * std::sin(direction) / wavelength));
        if (m == 0 && n == 0) continue;
        w.kx = kTwoPi * m / opt.width;
        w.ky = kTwoPi * n / opt.height;
        const double lam = kTwoPi / std::hypot(w.kx, w.ky);
        if (lam < opt.min_wavelength - 1e-9 || lam > opt.max_wavelength + 1e-9) continue;
        if (!used.insert({m, n, c}).second) continue;
        w.omega = kTwoPi * c / opt.frames;
      } else {
        const double k = kTwoPi / wavelength;
        w.kx = k * std::cos(direction);
        w.ky = k * std::sin(direction);
        w.omega = kTwoPi * c / opt.frames;
      }
      model.waves.push_back(w);
    }
    const double scale = target_sigma_motion / analytic_rms_displacement(model);
    for (SineWave& w : model.waves) w.amplitude *= scale;
    const double slope = max_distortion_slope(model);
    if (slope <= opt.max_slope) return model;
    if (slope < best_slope) {
      best_slope = slope;
      best = model;
    }
  }
  // No draw met the fold bound; return the gentlest one.
  return best;
}

Frame distort_frame(const Frame& clean, const SurfaceModel& model, int t) {
  const int w = clean.width();
  const int h = clean.height();
  FlowField inv(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) inv.set(x, y, inverse_displacement(model, x, y, t));
  }
  return warp(clean, inv);
}

GroundTruthBundle synthesize(const Frame& clean, const SurfaceModel& model, int frames, std::uint64_t seed,
                             const SynthesisOptions& options) {
  if (clean.empty()) throw DataError("synthesize: empty clean frame");
  if (frames < 1) throw UsageError("synthesize: need at least one frame");
  validate(model);

  GroundTruthBundle bundle;
  bundle.clean = clean;
  bundle.model = model;
  bundle.rng_seed = seed;
  bundle.distorted.fps = options.fps;
  bundle.distorted.frames.resize(static_cast<std::size_t>(frames));
  parallel_for(0, static_cast<std::size_t>(frames), [&](std::size_t t) {
    bundle.distorted.frames[t] = distort_frame(clean, model, static_cast<int>(t));
  });
  if (options.noise_sigma > 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, options.noise_sigma);
    for (Frame& f : bundle.distorted.frames) {
      Plane p = f.plane();
      for (double& v : p.data) v += noise(rng);
      f = Frame::from_plane(std::move(p));
    }
  }
  bundle.true_field = displacement_field(model, clean.width(), clean.height(), frames);
  return bundle;
}

std::string model_to_json(const SurfaceModel& model, std::uint64_t seed) {
  nlohmann::json j;
  j["depth_gain"] = model.depth_gain;
  j["seed"] = seed;
  j["waves"] = nlohmann::json::array();
  for (const SineWave& w : model.waves) {
    j["waves"].push_back({{"amplitude", w.amplitude},
                          {"kx", w.kx},
                          {"ky", w.ky},
                          {"omega", w.omega},
                          {"phase", w.phase}});
  }
  j["num_waves"] = model.waves.size();
  return j.dump(2);
}

SurfaceModel model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SurfaceModel m;
    m.depth_gain = j.at("depth_gain").get<double>();
    for (const auto& w : j.at("waves")) {
      m.waves.push_back({w.at("amplitude").get<double>(), w.at("kx").get<double>(), w.at("ky").get<double>(),
                         w.at("omega").get<double>(), w.at("phase").get<double>()});
    }
    validate(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad surface model: ") + e.what());
  }
}

namespace {

Plane normalized(Plane p, double lo, double hi) {
  const auto [mn, mx] = std::minmax_element(p.data.begin(), p.data.end());
  const double a = *mn;
  const double range = std::max(*mx - a, 1e-12);
  for (double& v : p.data) v = lo + (hi - lo) * (v - a) / range;
  return p;
}

Plane noise_plane(int w, int h, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Plane p(w, h);
  for (double& v : p.data) v = n(rng);
  return p;
}

}  // namespace

Frame make_test_scene(SceneKind kind, int width, int height, std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw UsageError("scene size must be positive");
  std::mt19937_64 rng(seed);
  switch (kind) {
    case SceneKind::texture: {
      Plane fine = gaussian_blur(noise_plane(width, height, rng), 1.2);
      Plane coarse = gaussian_blur(noise_plane(width, height, rng), 3.0);
      fine = normalized(std::move(fine), -1.0, 1.0);
      coarse = normalized(std::move(coarse), -1.0, 1.0);
      Plane mix(width, height);
      for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = fine.data[i] + 0.8 * coarse.data[i];
      return Frame::from_plane(normalized(std::move(mix), 0.1, 0.9));
    }
    case SceneKind::checker: {
      Plane p(width, height);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) p(x, y) = ((x / 8 + y / 8) % 2) ? 0.8 : 0.2;
      return Frame::from_plane(std::move(p));
    }
    case SceneKind::blocks: {
      Plane p = normalized(gaussian_blur(noise_plane(width, height, rng), 12.0), 0.3, 0.6);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      const int count = std::max(8, width * height / 600);
      for (int i = 0; i < count; ++i) {
        const int bw = 3 + static_cast<int>(u(rng) * 20);
        const int bh = 3 + static_cast<int>(u(rng) * 20);
        const int x0 = static_cast<int>(u(rng) * width);
        const int y0 = static_cast<int>(u(rng) * height);
        const double v = 0.1 + 0.8 * u(rng);
        for (int y = y0; y < std::min(height, y0 + bh); ++y)
          for (int x = x0; x < std::min(width, x0 + bw); ++x) p(x, y) = v;
      }
      return Frame::from_plane(gaussian_blur(p, 0.7));
    }
  }
  throw UsageError("unknown scene kind");
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "texture") return SceneKind::texture;
  if (name == "checker") return SceneKind::checker;
  if (name == "blocks") return SceneKind::blocks;
  throw UsageError("unknown scene '" + name + "' (expected texture, checker or blocks)");
}

}  // namespace wavecs
