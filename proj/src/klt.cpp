#include "klt.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "wavecs/simd/kernels.hpp"

namespace wavecs::klt {
namespace {

Plane decimate(const Plane& src) {
  static constexpr std::array<double, 5> binomial{1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
  const Plane blurred = separable_filter(src, binomial, binomial);
  const int w = (src.width + 1) / 2;
  const int h = (src.height + 1) / 2;
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = blurred(2 * x, 2 * y);
  return out;
}

// Patch views into a plane: direct pointer when the (win+1)^2 block is
// inside the plane, else a clamped copy.
class BlockReader {
 public:
  explicit BlockReader(std::size_t win) : side_(win + 1), scratch_(side_ * side_) {}

  struct View {
    const double* data;
    std::size_t stride;
  };

  View read(const Plane& p, int x0, int y0) {
    const int s = static_cast<int>(side_);
    if (x0 >= 0 && y0 >= 0 && x0 + s <= p.width && y0 + s <= p.height) {
      return {p.data.data() + static_cast<std::size_t>(y0) * p.width + x0, static_cast<std::size_t>(p.width)};
    }
    for (int r = 0; r < s; ++r) {
      const int yy = std::clamp(y0 + r, 0, p.height - 1);
      for (int c = 0; c < s; ++c) scratch_[r * side_ + c] = p(std::clamp(x0 + c, 0, p.width - 1), yy);
    }
    return {scratch_.data(), side_};
  }

 private:
  std::size_t side_;
  std::vector<double> scratch_;
};

struct Anchor {
  int x0, y0;
  std::array<double, 4> w;
};

Anchor anchor_for(double x, double y, int half) {
  const double fx0 = std::floor(x);
  const double fy0 = std::floor(y);
  const double fx = x - fx0;
  const double fy = y - fy0;
  return {static_cast<int>(fx0) - half, static_cast<int>(fy0) - half,
          {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
}

}  // namespace

Pyramid build_pyramid(const Frame& frame, int levels) {
  static constexpr std::array<double, 3> smooth{3 / 16.0, 10 / 16.0, 3 / 16.0};
  static constexpr std::array<double, 3> diff{-0.5, 0.0, 0.5};
  Pyramid pyr;
  pyr.reserve(static_cast<std::size_t>(levels));
  Plane img = frame.plane();
  for (int l = 0; l < levels; ++l) {
    if (l > 0) img = decimate(img);
    Level lvl;
    lvl.gx = separable_filter(img, diff, smooth);
    lvl.gy = separable_filter(img, smooth, diff);
    lvl.img = img;
    pyr.push_back(std::move(lvl));
    if (img.width < 8 || img.height < 8) break;
  }
  return pyr;
}

thread_local double cached_sigma = -1.0;

Result track_point(const Pyramid& prev, const Pyramid& next, Point2 pt, Displacement2 guess,
                   const TrackerParams& params) {
  const auto& k = simd::kernels();
  const std::size_t win = static_cast<std::size_t>(params.window);
  const int half = params.window / 2;
  const std::size_t area = win * win;
  thread_local std::vector<double> tmpl, tgx, tgy, wgx, wgy, wts;
  tmpl.resize(area);
  tgx.resize(area);
  tgy.resize(area);
  wgx.resize(area);
  wgy.resize(area);
  if (wts.size() != area || cached_sigma != params.weight_sigma) {
    wts.assign(area, 1.0);
    if (params.weight_sigma > 0) {
      const double k2 = -0.5 / (params.weight_sigma * params.weight_sigma);
      for (std::size_t r = 0; r < win; ++r)
        for (std::size_t c = 0; c < win; ++c) {
          const double dy = static_cast<double>(r) - half, dx = static_cast<double>(c) - half;
          wts[r * win + c] = std::exp(k2 * (dx * dx + dy * dy));
        }
    }
    cached_sigma = params.weight_sigma;
  }
  double wsum = 0;
  for (double w : wts) wsum += w;
  BlockReader reader(win);

  Result res;
  const int top = static_cast<int>(std::min(prev.size(), next.size())) - 1;
  double vx = guess.dx / std::ldexp(1.0, top);
  double vy = guess.dy / std::ldexp(1.0, top);

  for (int l = top; l >= 0; --l) {
    const Level& P = prev[l];
    const Level& N = next[l];
    const double scale = std::ldexp(1.0, -l);
    const double px = pt.x * scale;
    const double py = pt.y * scale;

    const Anchor a = anchor_for(px, py, half);
    auto v = reader.read(P.img, a.x0, a.y0);
    k.sample_block(v.data, v.stride, win, a.w.data(), tmpl.data());
    v = reader.read(P.gx, a.x0, a.y0);
    k.sample_block(v.data, v.stride, win, a.w.data(), tgx.data());
    v = reader.read(P.gy, a.x0, a.y0);
    k.sample_block(v.data, v.stride, win, a.w.data(), tgy.data());

    double gxx = 0, gxy = 0, gyy = 0;
    for (std::size_t i = 0; i < area; ++i) {
      wgx[i] = wts[i] * tgx[i];
      wgy[i] = wts[i] * tgy[i];
      gxx += wgx[i] * tgx[i];
      gxy += wgx[i] * tgy[i];
      gyy += wgy[i] * tgy[i];
    }
    const double det = gxx * gyy - gxy * gxy;
    const double min_eig = 0.5 * (gxx + gyy - std::sqrt((gxx - gyy) * (gxx - gyy) + 4 * gxy * gxy)) / wsum;
    if (l == 0) {
      res.min_eig = min_eig;
      if (min_eig < params.min_eigenvalue || !(det > 0)) return res;
    } else if (!(det > 1e-18)) {
      // Featureless at this scale; carry the estimate down unchanged.
      vx *= 2.0;
      vy *= 2.0;
      continue;
    }

    simd::PatchSums sums;
    const double vx0 = vx, vy0 = vy;
    bool lost = false;
    for (int it = 0; it < params.max_iterations; ++it) {
      const double qx = px + vx;
      const double qy = py + vy;
      if (qx < -half || qy < -half || qx > N.img.width - 1 + half || qy > N.img.height - 1 + half) {
        lost = true;
        break;
      }
      const Anchor b = anchor_for(qx, qy, half);
      const auto j = reader.read(N.img, b.x0, b.y0);
      sums = k.lk_sums(j.data, j.stride, win, b.w.data(), tmpl.data(), wgx.data(), wgy.data());
      const double ex = (gyy * sums.bx - gxy * sums.by) / det;
      const double ey = (gxx * sums.by - gxy * sums.bx) / det;
      vx += ex;
      vy += ey;
      if (!std::isfinite(vx) || !std::isfinite(vy)) {
        lost = true;
        break;
      }
      if (ex * ex + ey * ey < params.epsilon * params.epsilon) break;
    }
    if (lost) {
      if (l == 0) return res;
      // Coarse levels only seed the next one; fall back to the incoming estimate.
      vx = vx0;
      vy = vy0;
    }
    if (l > 0) {
      vx *= 2.0;
      vy *= 2.0;
    } else {
      // Residual at the final position.
      const Anchor b = anchor_for(px + vx, py + vy, half);
      const auto j = reader.read(N.img, b.x0, b.y0);
      sums = k.lk_sums(j.data, j.stride, win, b.w.data(), tmpl.data(), wgx.data(), wgy.data());
      res.residual = std::sqrt(sums.sq / area);
    }
  }

  res.pos = {pt.x + vx, pt.y + vy};
  const Level& base = next.front();
  res.ok = res.residual <= params.max_residual && res.pos.x >= 0 && res.pos.y >= 0 &&
           res.pos.x <= base.img.width - 1 && res.pos.y <= base.img.height - 1;
  return res;
}

}  // namespace wavecs::klt
