#include "wavecs/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "klt.hpp"
#include "wavecs/error.hpp"
#include "wavecs/parallel.hpp"

namespace wavecs {

std::vector<Trajectory> track(const Video& video, std::span<const Point2> seeds, const TrackerParams& params) {
  if (seeds.empty()) throw DataError("track: no seed points");
  check_video(video, 1);
  if (params.window < 3 || params.window % 2 == 0) throw UsageError("track: window must be odd and >= 3");
  if (params.levels < 1) throw UsageError("track: need at least one pyramid level");

  const int w = video.width();
  const int h = video.height();
  const std::size_t T = video.size();
  std::vector<Trajectory> trajs(seeds.size());
  std::vector<Displacement2> velocity(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Point2 s = seeds[i];
    if (!(s.x >= 0 && s.y >= 0 && s.x <= w - 1 && s.y <= h - 1)) {
      throw DataError("track: seed " + std::to_string(i) + " lies outside the first frame");
    }
    trajs[i].id = static_cast<int>(i);
    trajs[i].points.reserve(T);
    trajs[i].points.push_back(s);
  }

  klt::Pyramid prev = klt::build_pyramid(video.frames[0], params.levels);
  for (std::size_t t = 1; t < T; ++t) {
    klt::Pyramid next = klt::build_pyramid(video.frames[t], params.levels);
    parallel_for(0, trajs.size(), [&](std::size_t i) {
      Trajectory& tr = trajs[i];
      const Point2 p = tr.points.back();
      if (tr.failed_at >= 0) {
        tr.points.push_back(p);
        return;
      }
      const klt::Result fwd = klt::track_point(prev, next, p, velocity[i], params);
      bool ok = fwd.ok;
      if (ok && params.max_fb_error > 0) {
        const Displacement2 back_guess{p.x - fwd.pos.x, p.y - fwd.pos.y};
        const klt::Result back = klt::track_point(next, prev, fwd.pos, back_guess, params);
        ok = back.ok && std::hypot(back.pos.x - p.x, back.pos.y - p.y) <= params.max_fb_error;
      }
      if (!ok) {
        tr.failed_at = static_cast<int>(t);
        tr.valid = false;
        tr.reason = RejectReason::klt;
        tr.points.push_back(p);
        return;
      }
      velocity[i] = {fwd.pos.x - p.x, fwd.pos.y - p.y};
      tr.points.push_back(fwd.pos);
    });
    prev = std::move(next);
  }
  apply_cot_split_rule(trajs, params.cot_split_threshold);
  return trajs;
}

double cot_split_distance(const Trajectory& traj) {
  const std::size_t T = traj.points.size();
  const std::size_t half = T / 2;
  if (half == 0) return 0.0;
  double ax = 0, ay = 0, bx = 0, by = 0;
  for (std::size_t t = 0; t < half; ++t) {
    ax += traj.points[t].x;
    ay += traj.points[t].y;
    bx += traj.points[T - half + t].x;
    by += traj.points[T - half + t].y;
  }
  return std::hypot(ax - bx, ay - by) / static_cast<double>(half);
}

int apply_cot_split_rule(std::vector<Trajectory>& trajs, double threshold) {
  int rejected = 0;
  for (Trajectory& tr : trajs) {
    if (!tr.valid) continue;
    if (cot_split_distance(tr) > threshold) {
      tr.valid = false;
      tr.reason = RejectReason::cot_split;
      ++rejected;
    }
  }
  return rejected;
}

DisplacementTrajectory to_displacement(const Trajectory& traj, AnchorMode mode) {
  if (!traj.valid) throw DataError("to_displacement: trajectory " + std::to_string(traj.id) + " is invalid");
  if (traj.points.empty()) throw DataError("to_displacement: trajectory " + std::to_string(traj.id) + " is empty");
  const std::size_t T = traj.points.size();
  DisplacementTrajectory dt;
  dt.id = traj.id;
  if (mode == AnchorMode::mean) {
    double sx = 0, sy = 0;
    for (const Point2& p : traj.points) {
      sx += p.x;
      sy += p.y;
    }
    dt.anchor = {sx / T, sy / T};
  } else {
    std::vector<double> xs, ys;
    for (const Point2& p : traj.points) {
      xs.push_back(p.x);
      ys.push_back(p.y);
    }
    auto median = [](std::vector<double>& v) {
      std::sort(v.begin(), v.end());
      const std::size_t n = v.size();
      return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    dt.anchor = {median(xs), median(ys)};
  }
  dt.offsets.reserve(T);
  for (const Point2& p : traj.points) dt.offsets.push_back({p.x - dt.anchor.x, p.y - dt.anchor.y});
  return dt;
}

std::vector<DisplacementTrajectory> to_displacements(std::span<const Trajectory> trajs, AnchorMode mode) {
  std::vector<DisplacementTrajectory> out;
  for (const Trajectory& t : trajs) {
    if (t.valid) out.push_back(to_displacement(t, mode));
  }
  return out;
}

void write_trajectories_csv(std::span<const Trajectory> trajs, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os.precision(10);
  os << "point_id,t,x,y,valid\n";
  for (const Trajectory& tr : trajs) {
    for (std::size_t t = 0; t < tr.points.size(); ++t) {
      os << tr.id << ',' << t << ',' << tr.points[t].x << ',' << tr.points[t].y << ',' << (tr.valid ? 1 : 0)
         << '\n';
    }
  }
  if (!os) throw DataError("write failed: " + path.string());
}

std::vector<Trajectory> read_trajectories_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line.rfind("point_id,t,x,y,valid", 0) != 0) throw DataError(path.string() + ": unexpected header");
  std::map<int, Trajectory> by_id;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f[5];
    for (auto& s : f) {
      if (!std::getline(ss, s, ',')) throw DataError(path.string() + ":" + std::to_string(lineno) + ": short row");
    }
    try {
      const int id = std::stoi(f[0]);
      const std::size_t t = std::stoul(f[1]);
      Trajectory& tr = by_id[id];
      tr.id = id;
      if (t != tr.points.size()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": frames out of order");
      tr.points.push_back({std::stod(f[2]), std::stod(f[3])});
      tr.valid = f[4] == "1";
      tr.reason = tr.valid ? RejectReason::none : RejectReason::klt;
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
  }
  std::vector<Trajectory> out;
  for (auto& [id, tr] : by_id) out.push_back(std::move(tr));
  return out;
}

}  // namespace wavecs
