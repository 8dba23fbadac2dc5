#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wavecs/error.hpp"
#include "wavecs/image_io.hpp"
#include "wavecs/pipeline.hpp"

namespace wavecs {

std::vector<BenchScene> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  const auto base = path.parent_path();
  std::vector<BenchScene> scenes;
  if (!j.contains("scenes")) return scenes;
  for (const auto& s : j.at("scenes")) {
    BenchScene sc;
    try {
      sc.name = s.at("name").get<std::string>();
      sc.clean = s.at("clean").get<std::string>();
      sc.distorted = s.at("distorted").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw DataError("manifest " + path.string() + ": each scene needs name, clean and distorted");
    }
    if (sc.clean.is_relative()) sc.clean = base / sc.clean;
    if (sc.distorted.is_relative()) sc.distorted = base / sc.distorted;
    scenes.push_back(std::move(sc));
  }
  return scenes;
}

std::string bench_csv_header() { return "scene,mode,time_s,cv_time_s,nmi,ssim,rmse,mr,sigma_motion,status"; }

std::string to_csv(const BenchRow& r) {
  std::ostringstream os;
  os.precision(8);
  std::string status = r.status;
  for (char& c : status) {
    if (c == ',' || c == '\n' || c == '"') c = ' ';
  }
  os << r.scene << ',' << r.mode << ',' << r.time_s << ',' << r.cv_time_s << ',' << r.nmi << ',' << r.ssim << ','
     << r.rmse << ',' << r.mr << ',' << r.sigma_motion << ',' << status;
  return os.str();
}

std::vector<BenchRow> run_benchmark(const std::vector<BenchScene>& scenes, const std::vector<Mode>& modes,
                                    const PipelineConfig& cfg, const std::filesystem::path& csv,
                                    const std::optional<std::filesystem::path>& work_dir) {
  std::ofstream os(csv);
  if (!os) throw DataError("cannot open " + csv.string() + " for writing");
  os << bench_csv_header() << '\n' << std::flush;

  std::vector<BenchRow> rows;
  for (const BenchScene& sc : scenes) {
    Video distorted;
    Frame clean;
    std::vector<Trajectory> reference_tracks;
    std::string scene_error;
    try {
      distorted = load_sequence(sc.distorted);
      clean = read_image(sc.clean);
      if (clean.width() != distorted.width() || clean.height() != distorted.height()) {
        throw DataError("clean image and distorted frames differ in size");
      }
    } catch (const std::exception& e) {
      scene_error = std::string("error: ") + e.what();
    }
    for (Mode m : modes) {
      BenchRow row;
      row.scene = sc.name;
      row.mode = to_string(m);
      if (!scene_error.empty()) {
        row.status = scene_error;
      } else {
        try {
          PipelineConfig c = cfg;
          c.mode = m;
          std::optional<std::filesystem::path> dir;
          if (work_dir) dir = *work_dir / sc.name / row.mode;
          const RestoreResult res = run_restore(distorted, c, dir);
          row.time_s = res.log.total_seconds();
          row.cv_time_s = res.log.cv_seconds;
          const QualityReport q = evaluate_quality(res.mean_image, clean);
          row.nmi = q.nmi;
          row.ssim = q.ssim;
          row.rmse = q.rmse;
          if (!res.trajectories.empty()) reference_tracks = res.trajectories;
          if (reference_tracks.empty()) reference_tracks = track_video(distorted, c);
          const MotionStats ms = motion_stats(reference_tracks, res.restored, c);
          row.mr = ms.mr;
          row.sigma_motion = ms.sigma_motion;
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
        }
      }
      os << to_csv(row) << '\n' << std::flush;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace wavecs
