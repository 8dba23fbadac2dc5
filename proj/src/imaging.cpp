#include "wavecs/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavecs/error.hpp"
#include "wavecs/parallel.hpp"
#include "wavecs/simd/kernels.hpp"

namespace wavecs {

Plane::Plane(int w, int h, double fill) : width(w), height(h) {
  if (w < 0 || h < 0) throw DataError("negative image dimensions");
  data.assign(static_cast<std::size_t>(w) * h, fill);
}

Frame::Frame(int w, int h, double fill) : plane_(w, h, std::clamp(fill, 0.0, 1.0)) {}

Frame Frame::from_plane(Plane p) {
  for (double& v : p.data) {
    if (!std::isfinite(v)) throw DataError("non-finite intensity");
    v = std::clamp(v, 0.0, 1.0);
  }
  Frame f;
  f.plane_ = std::move(p);
  return f;
}

void Frame::set(int x, int y, double v) {
  if (!std::isfinite(v)) throw DataError("non-finite intensity");
  plane_(x, y) = std::clamp(v, 0.0, 1.0);
}

void check_video(const Video& video, std::size_t min_frames) {
  if (video.frames.size() < min_frames) {
    throw DataError("video has " + std::to_string(video.frames.size()) + " frames, need at least " +
                    std::to_string(min_frames));
  }
  if (video.frames.empty()) return;
  const int w = video.frames.front().width();
  const int h = video.frames.front().height();
  if (w <= 0 || h <= 0) throw DataError("video frames are empty");
  for (std::size_t t = 0; t < video.frames.size(); ++t) {
    if (video.frames[t].width() != w || video.frames[t].height() != h) {
      throw DataError("frame " + std::to_string(t) + " has mismatched dimensions");
    }
  }
}

double sample_bilinear(const Plane& img, double x, double y) noexcept {
  const int w = img.width;
  const int h = img.height;
  const double xf = std::clamp(x, 0.0, static_cast<double>(w - 1));
  const double yf = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(std::floor(xf)), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(std::floor(yf)), std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = xf - x0;
  const double fy = yf - y0;
  const double top = (1.0 - fx) * img(x0, y0) + fx * img(x1, y0);
  const double bot = (1.0 - fx) * img(x0, y1) + fx * img(x1, y1);
  return (1.0 - fy) * top + fy * bot;
}

double sample_bilinear(const Frame& frame, double x, double y) noexcept {
  return sample_bilinear(frame.plane(), x, y);
}

Plane warp(const Plane& img, const FlowField& field) {
  if (field.width() != img.width || field.height() != img.height) {
    throw DataError("warp: field is " + std::to_string(field.width()) + "x" + std::to_string(field.height()) +
                    ", image is " + std::to_string(img.width) + "x" + std::to_string(img.height));
  }
  for (std::size_t i = 0; i < field.dx.size(); ++i) {
    if (!std::isfinite(field.dx.data[i]) || !std::isfinite(field.dy.data[i])) {
      throw DataError("warp: non-finite displacement");
    }
  }
  Plane out(img.width, img.height);
  if (img.width < 2 || img.height < 2) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out(x, y) = sample_bilinear(img, x + field.dx(x, y), y + field.dy(x, y));
    return out;
  }
  const auto& k = simd::kernels();
  parallel_for(0, static_cast<std::size_t>(img.height), [&](std::size_t y) {
    const int yi = static_cast<int>(y);
    k.warp_row(img.data.data(), img.width, img.height, yi, field.dx.row(yi).data(), field.dy.row(yi).data(),
               out.row(yi).data());
  });
  return out;
}

Frame warp(const Frame& frame, const FlowField& field) { return Frame::from_plane(warp(frame.plane(), field)); }

Frame mean_frame(const Video& video) {
  check_video(video, 1);
  Plane acc(video.width(), video.height());
  for (const Frame& f : video.frames) {
    const auto px = f.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) acc.data[i] += px[i];
  }
  const double inv = 1.0 / static_cast<double>(video.size());
  for (double& v : acc.data) v *= inv;
  return Frame::from_plane(std::move(acc));
}

Frame median_frame(const Video& video) {
  check_video(video, 1);
  const std::size_t n = video.size();
  Plane out(video.width(), video.height());
  std::vector<double> column(n);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t t = 0; t < n; ++t) column[t] = video.frames[t].pixels()[i];
    const auto mid = column.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(column.begin(), mid, column.end());
    double m = *mid;
    if (n % 2 == 0) m = 0.5 * (m + *std::max_element(column.begin(), mid));
    out.data[i] = m;
  }
  return Frame::from_plane(std::move(out));
}

std::vector<double> gaussian_taps(double sigma, int radius) {
  std::vector<double> taps(2 * static_cast<std::size_t>(radius) + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = sigma > 0 ? std::exp(-0.5 * i * i / (sigma * sigma)) : (i == 0 ? 1.0 : 0.0);
    taps[i + radius] = v;
    sum += v;
  }
  for (double& v : taps) v /= sum;
  return taps;
}

Plane separable_filter(const Plane& img, std::span<const double> taps_x, std::span<const double> taps_y) {
  const int w = img.width;
  const int h = img.height;
  const int rx = static_cast<int>(taps_x.size() / 2);
  const int ry = static_cast<int>(taps_y.size() / 2);
  const auto& k = simd::kernels();

  Plane tmp(w, h);
  std::vector<double> padded(static_cast<std::size_t>(w) + 2 * rx);
  for (int y = 0; y < h; ++y) {
    const auto src = img.row(y);
    for (int i = 0; i < w + 2 * rx; ++i) padded[i] = src[std::clamp(i - rx, 0, w - 1)];
    k.correlate(padded.data(), static_cast<std::size_t>(w), taps_x.data(), taps_x.size(), tmp.row(y).data());
  }

  Plane out(w, h);
  std::vector<const double*> rows(taps_y.size());
  for (int y = 0; y < h; ++y) {
    for (int j = 0; j < static_cast<int>(taps_y.size()); ++j) {
      rows[j] = tmp.row(std::clamp(y + j - ry, 0, h - 1)).data();
    }
    k.weighted_row_sum(rows.data(), taps_y.data(), taps_y.size(), static_cast<std::size_t>(w), out.row(y).data());
  }
  return out;
}

Plane gaussian_blur(const Plane& img, double sigma) {
  if (sigma <= 0) return img;
  const auto taps = gaussian_taps(sigma, std::max(1, static_cast<int>(std::ceil(3.0 * sigma))));
  return separable_filter(img, taps, taps);
}

Plane resize(const Plane& img, int w, int h) {
  if (w <= 0 || h <= 0) throw DataError("resize: non-positive target size");
  Plane out(w, h);
  const double sx = static_cast<double>(img.width) / w;
  const double sy = static_cast<double>(img.height) / h;
  for (int y = 0; y < h; ++y) {
    const double yy = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < w; ++x) out(x, y) = sample_bilinear(img, (x + 0.5) * sx - 0.5, yy);
  }
  return out;
}

Frame center_crop_resize(const Frame& frame, int w, int h) {
  if (frame.empty()) throw DataError("center_crop_resize: empty frame");
  const double target = static_cast<double>(w) / h;
  int cw = frame.width();
  int ch = frame.height();
  if (static_cast<double>(cw) / ch > target) {
    cw = std::max(1, static_cast<int>(std::lround(ch * target)));
  } else {
    ch = std::max(1, static_cast<int>(std::lround(cw / target)));
  }
  const int x0 = (frame.width() - cw) / 2;
  const int y0 = (frame.height() - ch) / 2;
  Plane crop(cw, ch);
  for (int y = 0; y < ch; ++y)
    for (int x = 0; x < cw; ++x) crop(x, y) = frame(x0 + x, y0 + y);
  if (cw == w && ch == h) return Frame::from_plane(std::move(crop));
  // Pre-smooth when shrinking so the bilinear resize does not alias.
  const double shrink = static_cast<double>(cw) / w;
  if (shrink > 1.0) crop = gaussian_blur(crop, 0.5 * (shrink - 1.0));
  return Frame::from_plane(resize(crop, w, h));
}

}  // namespace wavecs
