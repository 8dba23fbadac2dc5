#include "wavecs/peof.hpp"

#include <array>
#include <cmath>

#include "wavecs/error.hpp"
#include "wavecs/parallel.hpp"

namespace wavecs {
namespace {

using Mat6 = std::array<std::array<double, 6>, 6>;

// Basis exponents (a, b) for x^a y^b in the order 1, x, y, x^2, y^2, xy.
constexpr std::array<std::array<int, 2>, 6> kBasis{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}}};

Mat6 invert(Mat6 a) {
  Mat6 inv{};
  for (int i = 0; i < 6; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 6; ++col) {
    int piv = col;
    for (int r = col + 1; r < 6; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-300) throw NumericalError("poly_expand: singular Gram matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double d = a[col][col];
    for (int j = 0; j < 6; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int r = 0; r < 6; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (int j = 0; j < 6; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

Plane blend_level(const Plane& img, double scale, int w, int h) {
  const double sigma = (1.0 / scale - 1.0) * 0.5;
  return resize(sigma > 0 ? gaussian_blur(img, sigma) : img, w, h);
}

}  // namespace

void validate(const FlowParams& p) {
  if (p.levels < 1) throw UsageError("flow: levels must be >= 1");
  if (!(p.pyr_scale > 0 && p.pyr_scale < 1)) throw UsageError("flow: pyr_scale must lie in (0, 1)");
  if (p.iterations < 1) throw UsageError("flow: iterations must be >= 1");
  if (p.poly_window < 3 || p.poly_window % 2 == 0) throw UsageError("flow: poly_window must be odd and >= 3");
  if (!(p.poly_sigma > 0)) throw UsageError("flow: poly_sigma must be > 0");
  if (p.avg_window < 1 || p.avg_window % 2 == 0) throw UsageError("flow: avg_window must be odd and >= 1");
  if (!(p.min_eigenvalue >= 0)) throw UsageError("flow: min_eigenvalue must be >= 0");
}

PolyExpansion poly_expand(const Plane& img, int window, double sigma) {
  if (window < 3 || window % 2 == 0) throw UsageError("poly_expand: window must be odd and >= 3");
  if (!(sigma > 0)) throw UsageError("poly_expand: sigma must be > 0");
  if (img.empty()) throw DataError("poly_expand: empty image");
  const int r = window / 2;

  // Per-axis kernels g(k) * k^p for p = 0, 1, 2.
  std::array<std::vector<double>, 3> taps;
  for (auto& t : taps) t.resize(window);
  for (int k = -r; k <= r; ++k) {
    const double g = std::exp(-0.5 * k * k / (sigma * sigma));
    taps[0][k + r] = g;
    taps[1][k + r] = g * k;
    taps[2][k + r] = g * k * k;
  }
  // Gram matrix of the weighted basis over the full window.
  Mat6 gram{};
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const int ax = kBasis[i][0] + kBasis[j][0];
      const int ay = kBasis[i][1] + kBasis[j][1];
      double sx = 0, sy = 0;
      for (int k = -r; k <= r; ++k) {
        const double g = std::exp(-0.5 * k * k / (sigma * sigma));
        sx += g * std::pow(k, ax);
        sy += g * std::pow(k, ay);
      }
      gram[i][j] = sx * sy;
    }
  const Mat6 ginv = invert(gram);

  std::array<Plane, 6> moments;
  for (int j = 0; j < 6; ++j) moments[j] = separable_filter(img, taps[kBasis[j][0]], taps[kBasis[j][1]]);

  PolyExpansion out;
  std::array<Plane*, 6> dst{&out.c, &out.bx, &out.by, &out.axx, &out.ayy, &out.axy};
  for (Plane* p : dst) *p = Plane(img.width, img.height);
  const std::size_t n = img.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 6> m;
    for (int j = 0; j < 6; ++j) m[j] = moments[j].data[i];
    for (int row = 0; row < 6; ++row) {
      double s = 0.0;
      for (int j = 0; j < 6; ++j) s += ginv[row][j] * m[j];
      dst[row]->data[i] = s;
    }
  }
  return out;
}

PolyExpansion poly_expand(const Frame& frame, int window, double sigma) {
  return poly_expand(frame.plane(), window, sigma);
}

FlowField flow_step(const PolyExpansion& e1, const PolyExpansion& e2, const FlowField& prior,
                    const FlowParams& params) {
  const int w = e1.c.width;
  const int h = e1.c.height;
  if (e2.c.width != w || e2.c.height != h || prior.width() != w || prior.height() != h) {
    throw DataError("flow_step: size mismatch");
  }
  int band = params.poly_window / 2;
  if (w <= 2 * band + 1 || h <= 2 * band + 1) band = 0;

  Plane g11(w, h), g12(w, h), g22(w, h), h1(w, h), h2(w, h);
  for (int y = 0; y < h; ++y) {
    const bool edge_row = y < band || y >= h - band;
    for (int x = 0; x < w; ++x) {
      if (edge_row || x < band || x >= w - band) continue;
      const double a11 = 0.5 * (e1.axx(x, y) + e2.axx(x, y));
      const double a22 = 0.5 * (e1.ayy(x, y) + e2.ayy(x, y));
      const double a12 = 0.25 * (e1.axy(x, y) + e2.axy(x, y));
      const double px = prior.dx(x, y);
      const double py = prior.dy(x, y);
      const double bx = -0.5 * (e2.bx(x, y) - e1.bx(x, y)) + a11 * px + a12 * py;
      const double by = -0.5 * (e2.by(x, y) - e1.by(x, y)) + a12 * px + a22 * py;
      g11(x, y) = a11 * a11 + a12 * a12;
      g12(x, y) = a12 * (a11 + a22);
      g22(x, y) = a12 * a12 + a22 * a22;
      h1(x, y) = a11 * bx + a12 * by;
      h2(x, y) = a12 * bx + a22 * by;
    }
  }
  const auto taps = gaussian_taps(0.3 * params.avg_window, params.avg_window / 2);
  g11 = separable_filter(g11, taps, taps);
  g12 = separable_filter(g12, taps, taps);
  g22 = separable_filter(g22, taps, taps);
  h1 = separable_filter(h1, taps, taps);
  h2 = separable_filter(h2, taps, taps);

  FlowField out = prior;
  for (std::size_t i = 0; i < g11.size(); ++i) {
    const double a = g11.data[i], b = g12.data[i], d = g22.data[i];
    const double det = a * d - b * b;
    const double min_eig = 0.5 * (a + d - std::sqrt((a - d) * (a - d) + 4 * b * b));
    if (!(min_eig > params.min_eigenvalue) || !(det > 0)) continue;
    out.dx.data[i] = (d * h1.data[i] - b * h2.data[i]) / det;
    out.dy.data[i] = (a * h2.data[i] - b * h1.data[i]) / det;
  }
  return out;
}

FlowField estimate_flow(const Frame& from, const Frame& to, const FlowParams& params) {
  validate(params);
  const int W = from.width();
  const int H = from.height();
  if (to.width() != W || to.height() != H) throw DataError("estimate_flow: frame sizes differ");
  if (W < 2 || H < 2) throw DataError("estimate_flow: frames must be at least 2x2");

  // Drop levels that would be smaller than the polynomial window.
  int levels = params.levels;
  while (levels > 1) {
    const double s = std::pow(params.pyr_scale, levels - 1);
    if (std::lround(W * s) >= params.poly_window && std::lround(H * s) >= params.poly_window) break;
    --levels;
  }

  FlowField flow;
  for (int l = levels - 1; l >= 0; --l) {
    const double s = std::pow(params.pyr_scale, l);
    const int w = l == 0 ? W : static_cast<int>(std::lround(W * s));
    const int h = l == 0 ? H : static_cast<int>(std::lround(H * s));
    const Plane f = l == 0 ? from.plane() : blend_level(from.plane(), s, w, h);
    const Plane g = l == 0 ? to.plane() : blend_level(to.plane(), s, w, h);
    if (flow.dx.empty()) {
      flow = FlowField(w, h);
    } else {
      const double fx = static_cast<double>(w) / flow.width();
      const double fy = static_cast<double>(h) / flow.height();
      FlowField up;
      up.dx = resize(flow.dx, w, h);
      up.dy = resize(flow.dy, w, h);
      for (double& v : up.dx.data) v *= fx;
      for (double& v : up.dy.data) v *= fy;
      flow = std::move(up);
    }
    const PolyExpansion e1 = poly_expand(f, params.poly_window, params.poly_sigma);
    for (int it = 0; it < params.iterations; ++it) {
      const PolyExpansion e2 = poly_expand(warp(g, flow), params.poly_window, params.poly_sigma);
      flow = flow_step(e1, e2, flow, params);
    }
  }
  return flow;
}

Video restore_video_peof(const Video& video, const FlowParams& params, int outer_iters,
                         std::vector<FlowField>* flows) {
  check_video(video, 1);
  validate(params);
  if (outer_iters < 1) throw UsageError("restore_video_peof: outer_iters must be >= 1");
  Video out;
  out.fps = video.fps;
  std::vector<FlowField> fl(video.size());
  Frame reference = mean_frame(video);
  for (int pass = 0; pass < outer_iters; ++pass) {
    out.frames.assign(video.size(), Frame{});
    parallel_for(0, video.size(), [&](std::size_t t) {
      fl[t] = estimate_flow(reference, video.frames[t], params);
      out.frames[t] = warp(video.frames[t], fl[t]);
    });
    if (pass + 1 < outer_iters) reference = mean_frame(out);
  }
  if (flows) *flows = std::move(fl);
  return out;
}

}  // namespace wavecs
