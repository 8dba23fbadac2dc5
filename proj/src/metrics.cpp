#include "wavecs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "wavecs/error.hpp"

namespace wavecs {
namespace {

void require_same_size(const Frame& a, const Frame& b, const char* what) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DataError(std::string(what) + ": image sizes differ");
  }
  if (a.empty()) throw DataError(std::string(what) + ": empty image");
}

int bin_of(double v, int bins) { return std::clamp(static_cast<int>(v * bins), 0, bins - 1); }

// Summed in sorted order so equal histograms give bit-equal entropies.
double entropy(std::vector<double> counts, double total) {
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (double c : counts) {
    if (c > 0) {
      const double p = c / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace

double rmse(const Frame& restored, const Frame& truth) {
  require_same_size(restored, truth, "rmse");
  double num = 0.0, den = 0.0;
  const auto a = restored.pixels();
  const auto t = truth.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - t[i]) * (a[i] - t[i]);
    den += t[i] * t[i];
  }
  if (!(den > 0)) throw DataError("rmse: reference image is all zero");
  return std::sqrt(num / den);
}

double nmi(const Frame& a, const Frame& b, int bins) {
  require_same_size(a, b, "nmi");
  if (bins < 2) throw UsageError("nmi: need at least 2 bins");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  std::vector<double> ha(bins), hb(bins);
  std::unordered_map<std::int64_t, double> joint;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int ia = bin_of(pa[i], bins);
    const int ib = bin_of(pb[i], bins);
    ha[ia] += 1;
    hb[ib] += 1;
    joint[static_cast<std::int64_t>(ia) * bins + ib] += 1;
  }
  const double n = static_cast<double>(pa.size());
  std::vector<double> hj;
  hj.reserve(joint.size());
  for (const auto& [k, c] : joint) hj.push_back(c);
  const double h_joint = entropy(hj, n);
  // Both images constant: all entropies vanish; treat as perfectly dependent.
  if (h_joint <= 0) return 2.0;
  return (entropy(ha, n) + entropy(hb, n)) / h_joint;
}

double ssim(const Frame& a, const Frame& b, const SsimParams& p) {
  require_same_size(a, b, "ssim");
  if (a.width() < p.window || a.height() < p.window) throw DataError("ssim: image smaller than the window");
  const int r = p.window / 2;
  const auto taps = gaussian_taps(p.sigma, r);
  const Plane& A = a.plane();
  const Plane& B = b.plane();
  Plane aa(A.width, A.height), bb(A.width, A.height), ab(A.width, A.height);
  for (std::size_t i = 0; i < A.size(); ++i) {
    aa.data[i] = A.data[i] * A.data[i];
    bb.data[i] = B.data[i] * B.data[i];
    ab.data[i] = A.data[i] * B.data[i];
  }
  const Plane mu_a = separable_filter(A, taps, taps);
  const Plane mu_b = separable_filter(B, taps, taps);
  const Plane s_aa = separable_filter(aa, taps, taps);
  const Plane s_bb = separable_filter(bb, taps, taps);
  const Plane s_ab = separable_filter(ab, taps, taps);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  double sum = 0.0;
  std::size_t count = 0;
  for (int y = r; y < A.height - r; ++y) {
    for (int x = r; x < A.width - r; ++x) {
      const double ma = mu_a(x, y), mb = mu_b(x, y);
      const double va = s_aa(x, y) - ma * ma;
      const double vb = s_bb(x, y) - mb * mb;
      const double cov = s_ab(x, y) - ma * mb;
      sum += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double motion_reduction(std::span<const DisplacementTrajectory> before, std::span<const DisplacementTrajectory> after) {
  if (before.empty()) throw DataError("motion_reduction: no trajectories");
  if (before.size() != after.size()) throw DataError("motion_reduction: trajectory sets differ in size");
  std::unordered_map<int, const DisplacementTrajectory*> by_id;
  for (const auto& d : after) by_id[d.id] = &d;
  std::vector<double> ratios;
  ratios.reserve(before.size());
  for (const auto& d : before) {
    const auto it = by_id.find(d.id);
    if (it == by_id.end()) throw DataError("motion_reduction: trajectory " + std::to_string(d.id) + " is unmatched");
    const auto& e = *it->second;
    if (e.offsets.size() != d.offsets.size()) {
      throw DataError("motion_reduction: trajectory " + std::to_string(d.id) + " has mismatched lengths");
    }
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < d.offsets.size(); ++t) {
      const double ex = e.offsets[t].dx - d.offsets[t].dx;
      const double ey = e.offsets[t].dy - d.offsets[t].dy;
      num += ex * ex + ey * ey;
      den += d.offsets[t].dx * d.offsets[t].dx + d.offsets[t].dy * d.offsets[t].dy;
    }
    if (!(den > 0)) throw DataError("motion_reduction: trajectory " + std::to_string(d.id) + " has no motion");
    ratios.push_back(std::sqrt(num / den));
  }
  std::sort(ratios.begin(), ratios.end());
  const std::size_t n = ratios.size();
  const double med = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
  return 100.0 * med;
}

double sigma_motion(std::span<const Trajectory> trajs) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const Trajectory& tr : trajs) {
    if (!tr.valid || tr.points.empty()) continue;
    double cx = 0, cy = 0;
    for (const Point2& p : tr.points) {
      cx += p.x;
      cy += p.y;
    }
    cx /= tr.points.size();
    cy /= tr.points.size();
    for (const Point2& p : tr.points) sum += (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
    count += tr.points.size();
  }
  if (count <= 1) throw DataError("sigma_motion: need more than one tracked sample");
  return std::sqrt(sum / static_cast<double>(count - 1));
}

std::string QualityReport::to_text() const {
  std::ostringstream os;
  os.precision(10);
  os << "rmse=" << rmse << "\nnmi=" << nmi << "\nssim=" << ssim << '\n';
  for (const auto& [k, v] : details) os << k << '=' << v << '\n';
  return os.str();
}

std::string QualityReport::csv_header() { return "rmse,nmi,ssim"; }

std::string QualityReport::to_csv_row() const {
  std::ostringstream os;
  os.precision(10);
  os << rmse << ',' << nmi << ',' << ssim;
  return os.str();
}

QualityReport evaluate_quality(const Frame& restored, const Frame& truth) {
  QualityReport q;
  const SsimParams sp;
  q.rmse = rmse(restored, truth);
  q.nmi = nmi(restored, truth);
  q.ssim = ssim(restored, truth, sp);
  q.details["nmi.bins"] = "256";
  q.details["ssim.window"] = std::to_string(sp.window);
  q.details["ssim.sigma"] = "1.5";
  q.details["ssim.k1"] = "0.01";
  q.details["ssim.k2"] = "0.03";
  return q;
}

}  // namespace wavecs
