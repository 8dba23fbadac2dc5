#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wavecs/error.hpp"
#include "wavecs/metrics.hpp"
#include "wavecs/wave_sim.hpp"

using namespace wavecs;

namespace {

Frame noise(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Frame f(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) f.set(x, y, u(rng));
  return f;
}

Frame map(const Frame& f, double (*fn)(double)) {
  Plane p = f.plane();
  for (double& v : p.data) v = fn(v);
  return Frame::from_plane(std::move(p));
}

DisplacementTrajectory dt(int id, std::vector<Displacement2> o) { return {id, {0, 0}, std::move(o)}; }

// Oracle: direct entropies from explicit histograms.
double nmi_oracle(const Frame& a, const Frame& b) {
  std::vector<double> ha(256), hb(256), hj(256 * 256);
  const auto pa = a.pixels(), pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const int ia = std::min(255, int(pa[i] * 256)), ib = std::min(255, int(pb[i] * 256));
    ha[ia]++, hb[ib]++, hj[ia * 256 + ib]++;
  }
  auto H = [&](const std::vector<double>& h) {
    double s = 0;
    for (double c : h)
      if (c > 0) s -= c / pa.size() * std::log(c / pa.size());
    return s;
  };
  return (H(ha) + H(hb)) / H(hj);
}

}  // namespace

TEST(Metrics, IdentityValues) {
  const Frame f = make_test_scene(SceneKind::texture, 48, 48, 1);
  EXPECT_EQ(rmse(f, f), 0.0);
  EXPECT_EQ(nmi(f, f), 2.0);
  EXPECT_EQ(ssim(f, f), 1.0);
}

TEST(Metrics, RmseIsHomogeneous) {
  const Frame t = Frame(10, 10, 0.5);
  EXPECT_NEAR(rmse(Frame(10, 10, 0.55), t), 0.1, 1e-14);
  EXPECT_THROW(rmse(t, Frame(10, 10, 0.0)), DataError);
  EXPECT_THROW(rmse(t, Frame(9, 10, 0.5)), DataError);
}

TEST(Metrics, NmiOfIndependentNoiseApproachesOne) {
  const Frame a = noise(512, 512, 1), b = noise(512, 512, 2);
  const double v = nmi(a, b);
  EXPECT_NEAR(v, nmi_oracle(a, b), 1e-12);
  // Finite-sample bias of the joint entropy keeps this a little above 1.
  EXPECT_NEAR(v, 1.0, 0.05);
  EXPECT_NEAR(nmi(a, b), nmi(b, a), 1e-15);
}

TEST(Metrics, NmiInvariantToBinPreservingRelabelling) {
  const Frame a = make_test_scene(SceneKind::blocks, 64, 64, 3), b = noise(64, 64, 4);
  // Reversal maps bin i to bin 255 - i (away from bin edges) for both images.
  auto flip = [](double v) { return 1.0 - v; };
  const Frame fa = map(a, +flip), fb = map(b, +flip);
  EXPECT_NEAR(nmi(a, b), nmi(fa, fb), 0.02);
}

TEST(Metrics, SsimProperties) {
  const Frame a = make_test_scene(SceneKind::texture, 48, 48, 5);
  const Frame b = noise(48, 48, 6);
  EXPECT_NEAR(ssim(a, b), ssim(b, a), 1e-14);
  // Negative of a structured mid-grey image correlates negatively.
  Plane neg = a.plane();
  for (double& v : neg.data) v = 1.0 - v;
  EXPECT_LT(ssim(a, Frame::from_plane(neg)), 0.0);
  Plane up = a.plane();
  for (double& v : up.data) v += 0.05;
  const double s = ssim(a, Frame::from_plane(up));
  EXPECT_GT(s, 0.0);
  EXPECT_LT(s, 1.0);
  EXPECT_THROW(ssim(Frame(8, 8), Frame(8, 8)), DataError);
}

TEST(Metrics, SsimAtOneWindowMatchesFormula) {
  // 11x11 images: a single valid window, computed directly.
  const Frame a = noise(11, 11, 7), b = noise(11, 11, 8);
  const auto g = gaussian_taps(1.5, 5);
  double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
  for (int y = 0; y < 11; ++y)
    for (int x = 0; x < 11; ++x) {
      const double w = g[x] * g[y];
      ma += w * a(x, y), mb += w * b(x, y);
      saa += w * a(x, y) * a(x, y), sbb += w * b(x, y) * b(x, y), sab += w * a(x, y) * b(x, y);
    }
  const double c1 = 1e-4, c2 = 9e-4;
  const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
  const double want = (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
  EXPECT_NEAR(ssim(a, b), want, 1e-12);
}

TEST(Metrics, MotionReductionArithmetic) {
  const std::vector<DisplacementTrajectory> before{dt(1, {{1, 0}, {-1, 2}}), dt(2, {{0, 3}, {4, 0}})};
  std::vector<DisplacementTrajectory> zero{dt(2, {{0, 0}, {0, 0}}), dt(1, {{0, 0}, {0, 0}})};
  EXPECT_EQ(motion_reduction(before, zero), 100.0);
  EXPECT_EQ(motion_reduction(before, before), 0.0);
  std::vector<DisplacementTrajectory> small = before;
  for (auto& d : small)
    for (auto& o : d.offsets) o = {0.05 * o.dx, 0.05 * o.dy};
  EXPECT_NEAR(motion_reduction(before, small), 95.0, 1e-12);
  zero[0].id = 7;
  EXPECT_THROW(motion_reduction(before, zero), DataError);
}

TEST(Metrics, SigmaMotionClosedForm) {
  const int T = 10;
  const double r = 1.7;
  Trajectory tr;
  for (int t = 0; t < T; ++t) tr.points.push_back({5.0 + (t % 2 ? r : -r), 3.0});
  EXPECT_NEAR(sigma_motion(std::vector<Trajectory>{tr}), r * std::sqrt(T / (T - 1.0)), 1e-9);

  Trajectory still;
  still.points.assign(4, {1, 1});
  EXPECT_EQ(sigma_motion(std::vector<Trajectory>{still}), 0.0);
  Trajectory one;
  one.points = {{1, 1}};
  EXPECT_THROW(sigma_motion(std::vector<Trajectory>{one}), DataError);
}

TEST(Metrics, ReportSerialisation) {
  const Frame f = make_test_scene(SceneKind::texture, 32, 32, 9);
  const QualityReport q = evaluate_quality(f, f);
  EXPECT_NE(q.to_text().find("ssim=1\n"), std::string::npos);
  EXPECT_EQ(q.to_csv_row(), "0,2,1");
  EXPECT_EQ(QualityReport::csv_header(), "rmse,nmi,ssim");
}
