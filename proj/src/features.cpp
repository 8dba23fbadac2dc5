#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

#include "wavecs/tracking.hpp"

namespace wavecs {
namespace {

Plane sobel_x(const Plane& img) {
  static constexpr std::array<double, 3> smooth{0.25, 0.5, 0.25};
  static constexpr std::array<double, 3> diff{-0.5, 0.0, 0.5};
  return separable_filter(img, diff, smooth);
}

Plane sobel_y(const Plane& img) {
  static constexpr std::array<double, 3> smooth{0.25, 0.5, 0.25};
  static constexpr std::array<double, 3> diff{-0.5, 0.0, 0.5};
  return separable_filter(img, smooth, diff);
}

Plane harris_response(const Frame& frame, const DetectorParams& p) {
  const Plane gx = sobel_x(frame.plane());
  const Plane gy = sobel_y(frame.plane());
  Plane xx(gx.width, gx.height), xy(gx.width, gx.height), yy(gx.width, gx.height);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    xx.data[i] = gx.data[i] * gx.data[i];
    xy.data[i] = gx.data[i] * gy.data[i];
    yy.data[i] = gy.data[i] * gy.data[i];
  }
  xx = gaussian_blur(xx, p.harris_sigma);
  xy = gaussian_blur(xy, p.harris_sigma);
  yy = gaussian_blur(yy, p.harris_sigma);
  Plane r(gx.width, gx.height);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double det = xx.data[i] * yy.data[i] - xy.data[i] * xy.data[i];
    const double tr = xx.data[i] + yy.data[i];
    r.data[i] = det - p.harris_k * tr * tr;
  }
  return r;
}

// Vertex offset of the parabola through (-1, a), (0, b), (1, c), clamped to half a pixel.
double parabola_peak(double a, double b, double c) {
  const double denom = a - 2.0 * b + c;
  if (std::abs(denom) < 1e-300) return 0.0;
  return std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
}

Feature refine(const Plane& r, int x, int y) {
  Feature f;
  f.x = x + parabola_peak(r(x - 1, y), r(x, y), r(x + 1, y));
  f.y = y + parabola_peak(r(x, y - 1), r(x, y), r(x, y + 1));
  f.response = r(x, y);
  return f;
}

bool is_local_max(const Plane& r, int x, int y) {
  const double v = r(x, y);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
      if ((dx || dy) && r(x + dx, y + dy) > v) return false;
  return true;
}

// Bresenham circle of radius 3 used by the FAST segment test.
constexpr std::array<std::array<int, 2>, 16> kCircle{{{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0}, {3, 1},
                                                     {2, 2},  {1, 3},  {0, 3},  {-1, 3}, {-2, 2}, {-3, 1},
                                                     {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}}};

// Score of the longest qualifying arc (>= 9 contiguous) or 0.
double fast_score(const Plane& img, int x, int y, double thr) {
  const double c = img(x, y);
  std::array<int, 16> state{};
  std::array<double, 16> excess{};
  for (int i = 0; i < 16; ++i) {
    const double v = img(x + kCircle[i][0], y + kCircle[i][1]);
    if (v > c + thr) {
      state[i] = 1;
      excess[i] = v - c - thr;
    } else if (v < c - thr) {
      state[i] = -1;
      excess[i] = c - v - thr;
    }
  }
  double best = 0.0;
  for (const int sign : {1, -1}) {
    int run = 0;
    double sum = 0.0;
    for (int i = 0; i < 32; ++i) {
      const int k = i & 15;
      if (state[k] == sign) {
        ++run;
        sum += excess[k];
        if (run >= 9) best = std::max(best, sum);
        if (run == 16) break;
      } else {
        run = 0;
        sum = 0.0;
      }
    }
  }
  return best;
}

}  // namespace

std::vector<Feature> harris_corners(const Frame& frame, const DetectorParams& p) {
  std::vector<Feature> out;
  const int w = frame.width();
  const int h = frame.height();
  const int b = std::max(p.border, 1);
  if (w <= 2 * b || h <= 2 * b) return out;
  const Plane r = harris_response(frame, p);
  const double rmax = *std::max_element(r.data.begin(), r.data.end());
  if (!(rmax > 0)) return out;
  const double thr = p.harris_quality * rmax;
  for (int y = b; y < h - b; ++y) {
    for (int x = b; x < w - b; ++x) {
      if (r(x, y) > thr && is_local_max(r, x, y)) out.push_back(refine(r, x, y));
    }
  }
  return out;
}

std::vector<Feature> fast_keypoints(const Frame& frame, const DetectorParams& p) {
  std::vector<Feature> out;
  const int w = frame.width();
  const int h = frame.height();
  const int b = std::max(p.border, 3);
  if (w <= 2 * b || h <= 2 * b) return out;
  Plane score(w, h);
  for (int y = b; y < h - b; ++y)
    for (int x = b; x < w - b; ++x) score(x, y) = fast_score(frame.plane(), x, y, p.fast_threshold);
  for (int y = b; y < h - b; ++y) {
    for (int x = b; x < w - b; ++x) {
      if (score(x, y) > 0 && is_local_max(score, x, y)) out.push_back({double(x), double(y), score(x, y)});
    }
  }
  return out;
}

std::vector<Feature> detect_features(const Frame& frame, const DetectorParams& p) {
  const int w = frame.width();
  const int h = frame.height();
  const int b = std::max(p.border, 3);
  if (w <= 2 * b || h <= 2 * b) return {};
  const Plane r = harris_response(frame, p);

  std::vector<Feature> candidates = harris_corners(frame, p);
  for (const Feature& f : fast_keypoints(frame, p)) {
    // Put FAST hits on the Harris scale and refine them the same way.
    const int x = static_cast<int>(f.x);
    const int y = static_cast<int>(f.y);
    candidates.push_back(refine(r, x, y));
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Feature& a, const Feature& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });

  // Greedy suppression on a hash grid with cell size = radius.
  const double radius = std::max(p.dedupe_radius, 1e-9);
  const double r2 = radius * radius;
  auto cell_key = [&](double x, double y) {
    const auto cx = static_cast<std::int64_t>(std::floor(x / radius));
    const auto cy = static_cast<std::int64_t>(std::floor(y / radius));
    return (cy << 32) ^ (cx & 0xffffffff);
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> grid;
  std::vector<Feature> kept;
  for (const Feature& f : candidates) {
    const auto cx = static_cast<std::int64_t>(std::floor(f.x / radius));
    const auto cy = static_cast<std::int64_t>(std::floor(f.y / radius));
    bool clash = false;
    for (std::int64_t gy = cy - 1; gy <= cy + 1 && !clash; ++gy) {
      for (std::int64_t gx = cx - 1; gx <= cx + 1 && !clash; ++gx) {
        const auto it = grid.find((gy << 32) ^ (gx & 0xffffffff));
        if (it == grid.end()) continue;
        for (std::size_t k : it->second) {
          const double dx = kept[k].x - f.x;
          const double dy = kept[k].y - f.y;
          if (dx * dx + dy * dy <= r2) {
            clash = true;
            break;
          }
        }
      }
    }
    if (clash) continue;
    grid[cell_key(f.x, f.y)].push_back(kept.size());
    kept.push_back(f);
    if (p.max_features > 0 && static_cast<int>(kept.size()) >= p.max_features) break;
  }
  return kept;
}

}  // namespace wavecs
