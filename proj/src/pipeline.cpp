#include "wavecs/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wavecs/error.hpp"
#include "wavecs/image_io.hpp"

namespace wavecs {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& section) {
  if (!obj.is_object()) throw UsageError("config: '" + section + "' must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw UsageError("config: unknown key '" + (section.empty() ? k : section + "." + k) + "'");
  }
}

template <typename T>
void get(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw UsageError(std::string("config: bad value for '") + key + "'");
  }
}

AnchorMode anchor_from_string(const std::string& s) {
  if (s == "mean") return AnchorMode::mean;
  if (s == "median") return AnchorMode::median;
  throw UsageError("unknown anchor mode '" + s + "' (mean|median)");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path.string() + " for writing");
  os << text;
}

}  // namespace

Mode mode_from_string(const std::string& s) {
  if (s == "cs") return Mode::cs;
  if (s == "peof") return Mode::peof;
  if (s == "cs_peof") return Mode::cs_peof;
  throw UsageError("unknown mode '" + s + "' (cs|peof|cs_peof)");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::cs: return "cs";
    case Mode::peof: return "peof";
    case Mode::cs_peof: return "cs_peof";
  }
  return "?";
}

Aggregation aggregation_from_string(const std::string& s) {
  if (s == "mean") return Aggregation::mean;
  if (s == "median") return Aggregation::median;
  throw UsageError("unknown aggregation '" + s + "' (mean|median)");
}

std::string to_string(Aggregation a) { return a == Aggregation::mean ? "mean" : "median"; }

DetectorParams PipelineConfig::default_detector() {
  DetectorParams d;
  d.max_features = 2500;
  return d;
}

void validate(const PipelineConfig& cfg) {
  validate(cfg.solver);
  validate(cfg.flow);
  const TrackerParams& t = cfg.tracker;
  if (t.window < 3 || t.window % 2 == 0) throw UsageError("tracker.window must be odd and >= 3");
  if (!std::isfinite(t.weight_sigma)) throw UsageError("tracker.weight_sigma must be finite");
  if (t.levels < 1) throw UsageError("tracker.levels must be >= 1");
  if (t.max_iterations < 1) throw UsageError("tracker.max_iterations must be >= 1");
  if (!(t.epsilon > 0)) throw UsageError("tracker.epsilon must be > 0");
  if (!(t.cot_split_threshold > 0)) throw UsageError("tracker.cot_split_threshold must be > 0");
  const DetectorParams& d = cfg.detector;
  if (!(d.harris_sigma > 0)) throw UsageError("detector.harris_sigma must be > 0");
  if (!(d.harris_quality >= 0 && d.harris_quality < 1)) throw UsageError("detector.harris_quality must lie in [0, 1)");
  if (d.max_features < 0) throw UsageError("detector.max_features must be >= 0");
  if (!(cfg.lambda_rel > 0)) throw UsageError("lambda_rel must be > 0");
  if (cfg.peof_passes < 1) throw UsageError("peof_passes must be >= 1");
  if (cfg.min_sites < 1) throw UsageError("min_sites must be >= 1");
}

PipelineConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  PipelineConfig c;
  reject_unknown(j,
                 {"mode", "aggregation", "anchor", "detector", "tracker", "solver", "flow", "cross_validate",
                  "lambda_rel", "peof_passes", "min_sites", "seed"},
                 "");
  std::string s;
  if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("aggregation")) c.aggregation = aggregation_from_string(j.at("aggregation").get<std::string>());
  if (j.contains("anchor")) c.anchor = anchor_from_string(j.at("anchor").get<std::string>());
  get(j, "cross_validate", c.cross_validate);
  get(j, "lambda_rel", c.lambda_rel);
  get(j, "peof_passes", c.peof_passes);
  get(j, "min_sites", c.min_sites);
  get(j, "seed", c.seed);
  if (j.contains("detector")) {
    const json& d = j.at("detector");
    reject_unknown(d, {"harris_k", "harris_quality", "harris_sigma", "fast_threshold", "dedupe_radius", "border",
                       "max_features"},
                   "detector");
    get(d, "harris_k", c.detector.harris_k);
    get(d, "harris_quality", c.detector.harris_quality);
    get(d, "harris_sigma", c.detector.harris_sigma);
    get(d, "fast_threshold", c.detector.fast_threshold);
    get(d, "dedupe_radius", c.detector.dedupe_radius);
    get(d, "border", c.detector.border);
    get(d, "max_features", c.detector.max_features);
  }
  if (j.contains("tracker")) {
    const json& t = j.at("tracker");
    reject_unknown(t, {"window", "weight_sigma", "levels", "max_iterations", "epsilon", "min_eigenvalue", "max_residual",
                       "max_fb_error", "cot_split_threshold"},
                   "tracker");
    get(t, "window", c.tracker.window);
    get(t, "weight_sigma", c.tracker.weight_sigma);
    get(t, "levels", c.tracker.levels);
    get(t, "max_iterations", c.tracker.max_iterations);
    get(t, "epsilon", c.tracker.epsilon);
    get(t, "min_eigenvalue", c.tracker.min_eigenvalue);
    get(t, "max_residual", c.tracker.max_residual);
    get(t, "max_fb_error", c.tracker.max_fb_error);
    get(t, "cot_split_threshold", c.tracker.cot_split_threshold);
  }
  if (j.contains("solver")) {
    const json& s2 = j.at("solver");
    reject_unknown(s2, {"lambda", "max_iters", "tol", "downsample", "cv_holdout", "lambda_grid", "seed"}, "solver");
    get(s2, "lambda", c.solver.lambda);
    get(s2, "max_iters", c.solver.max_iters);
    get(s2, "tol", c.solver.tol);
    get(s2, "downsample", c.solver.downsample);
    get(s2, "cv_holdout", c.solver.cv_holdout);
    get(s2, "lambda_grid", c.solver.lambda_grid);
    get(s2, "seed", c.solver.seed);
  }
  if (j.contains("flow")) {
    const json& f = j.at("flow");
    reject_unknown(f, {"levels", "pyr_scale", "iterations", "poly_window", "poly_sigma", "avg_window",
                       "min_eigenvalue"},
                   "flow");
    get(f, "levels", c.flow.levels);
    get(f, "pyr_scale", c.flow.pyr_scale);
    get(f, "iterations", c.flow.iterations);
    get(f, "poly_window", c.flow.poly_window);
    get(f, "poly_sigma", c.flow.poly_sigma);
    get(f, "avg_window", c.flow.avg_window);
    get(f, "min_eigenvalue", c.flow.min_eigenvalue);
  }
  validate(c);
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["aggregation"] = to_string(c.aggregation);
  j["anchor"] = c.anchor == AnchorMode::mean ? "mean" : "median";
  j["cross_validate"] = c.cross_validate;
  j["lambda_rel"] = c.lambda_rel;
  j["peof_passes"] = c.peof_passes;
  j["min_sites"] = c.min_sites;
  j["seed"] = c.seed;
  j["detector"] = {{"harris_k", c.detector.harris_k},         {"harris_quality", c.detector.harris_quality},
                   {"harris_sigma", c.detector.harris_sigma}, {"fast_threshold", c.detector.fast_threshold},
                   {"dedupe_radius", c.detector.dedupe_radius}, {"border", c.detector.border},
                   {"max_features", c.detector.max_features}};
  j["tracker"] = {{"window", c.tracker.window},
                  {"weight_sigma", c.tracker.weight_sigma},
                  {"levels", c.tracker.levels},
                  {"max_iterations", c.tracker.max_iterations},
                  {"epsilon", c.tracker.epsilon},
                  {"min_eigenvalue", c.tracker.min_eigenvalue},
                  {"max_residual", c.tracker.max_residual},
                  {"max_fb_error", c.tracker.max_fb_error},
                  {"cot_split_threshold", c.tracker.cot_split_threshold}};
  j["solver"] = {{"lambda", c.solver.lambda},         {"max_iters", c.solver.max_iters},
                 {"tol", c.solver.tol},               {"downsample", c.solver.downsample},
                 {"cv_holdout", c.solver.cv_holdout}, {"lambda_grid", c.solver.lambda_grid},
                 {"seed", c.solver.seed}};
  j["flow"] = {{"levels", c.flow.levels},           {"pyr_scale", c.flow.pyr_scale},
               {"iterations", c.flow.iterations},   {"poly_window", c.flow.poly_window},
               {"poly_sigma", c.flow.poly_sigma},   {"avg_window", c.flow.avg_window},
               {"min_eigenvalue", c.flow.min_eigenvalue}};
  return j.dump(2);
}

double RestoreLog::total_seconds() const {
  double s = 0.0;
  for (const auto& [name, t] : stage_seconds) s += t;
  return s;
}

std::string RestoreLog::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << "tracked_points=" << tracked_points << '\n'
     << "valid_trajectories=" << valid_trajectories << '\n'
     << "rejected_klt=" << rejected_klt << '\n'
     << "rejected_cot_split=" << rejected_cot_split << '\n'
     << "solver_iterations=" << solver_iterations << '\n'
     << "solver_converged=" << (solver_converged ? 1 : 0) << '\n'
     << "lambda=" << lambda << '\n';
  for (const auto& [name, t] : stage_seconds) os << "time." << name << '=' << t << '\n';
  os << "time.total=" << total_seconds() << '\n' << "time.cross_validation=" << cv_seconds << '\n';
  return os.str();
}

Frame aggregate(const Video& video, Aggregation how) {
  return how == Aggregation::mean ? mean_frame(video) : median_frame(video);
}

std::vector<Trajectory> track_video(const Video& video, const PipelineConfig& cfg) {
  check_video(video, 1);
  const std::vector<Feature> feats = detect_features(video.frames.front(), cfg.detector);
  if (feats.empty()) throw DataError("no trackable features in the first frame");
  std::vector<Point2> seeds;
  seeds.reserve(feats.size());
  for (const Feature& f : feats) seeds.push_back({f.x, f.y});
  return track(video, seeds, cfg.tracker);
}

RestoreResult run_restore(const Video& video, const PipelineConfig& cfg,
                          const std::optional<std::filesystem::path>& run_dir) {
  validate(cfg);
  check_video(video, 10);
  if (run_dir) {
    std::filesystem::create_directories(*run_dir);
    write_text(*run_dir / "config.json", config_to_json(cfg) + "\n");
  }
  RestoreResult res;
  RestoreLog& log = res.log;
  Video current = video;

  if (cfg.mode != Mode::peof) {
    auto t0 = Clock::now();
    try {
      res.trajectories = track_video(video, cfg);
    } catch (const DataError& e) {
      throw DataError(std::string(e.what()) + "; the CS stage needs tracked points, try --mode peof");
    }
    log.tracked_points = res.trajectories.size();
    for (const Trajectory& tr : res.trajectories) {
      if (tr.valid) ++log.valid_trajectories;
      else if (tr.reason == RejectReason::cot_split) ++log.rejected_cot_split;
      else ++log.rejected_klt;
    }
    log.stage_seconds.emplace_back("track", seconds_since(t0));
    if (run_dir) write_trajectories_csv(res.trajectories, *run_dir / "trajectories.csv");
    if (log.valid_trajectories == 0) {
      throw DataError("no valid trajectories survived tracking; the distortion may be too strong for the CS stage, "
                      "try --mode peof");
    }

    t0 = Clock::now();
    const std::vector<DisplacementTrajectory> dts = to_displacements(res.trajectories, cfg.anchor);
    const GridDims full{video.width(), video.height(), static_cast<int>(video.size())};
    const SamplingPlan plan = build_plan(dts, full, cfg.solver.downsample, cfg.min_sites);
    LassoResult fit;
    if (cfg.cross_validate) {
      SolverParams sp = cfg.solver;
      sp.seed = cfg.seed ^ cfg.solver.seed;
      const auto cv_start = Clock::now();
      CrossValidation cv = cross_validate(plan, sp);
      log.lambda = cv.lambda;
      fit = std::move(cv.fit);
      log.cv_seconds = seconds_since(cv_start);
    } else {
      SolverParams sp = cfg.solver;
      if (sp.lambda <= 0) sp.lambda = cfg.lambda_rel * lambda_scale(plan);
      log.lambda = sp.lambda;
      fit = solve_lasso(plan, sp);
    }
    log.solver_iterations = fit.iterations;
    log.solver_converged = fit.converged;
    res.field = reconstruct_field(fit.theta, full, cfg.solver.downsample);
    res.solver_log = fit.log;
    log.stage_seconds.emplace_back("cs_solve", seconds_since(t0) - log.cv_seconds);
    if (run_dir) {
      write_iteration_log(fit, *run_dir / "solver_log.txt");
      write_motion_field(*res.field, *run_dir / "field.wmvf");
    }

    t0 = Clock::now();
    current = restore_video_cs(video, *res.field);
    log.stage_seconds.emplace_back("cs_restore", seconds_since(t0));
    if (run_dir && cfg.mode == Mode::cs_peof) save_sequence(current, *run_dir / "cs_restored");
  }

  if (cfg.mode != Mode::cs) {
    const auto t0 = Clock::now();
    current = restore_video_peof(current, cfg.flow, cfg.peof_passes);
    log.stage_seconds.emplace_back("peof", seconds_since(t0));
  }

  const auto t0 = Clock::now();
  res.mean_image = aggregate(current, cfg.aggregation);
  log.stage_seconds.emplace_back("aggregate", seconds_since(t0));
  res.restored = std::move(current);
  if (run_dir) {
    save_sequence(res.restored, *run_dir / "restored");
    write_image(res.mean_image, *run_dir / "mean.pgm");
    write_text(*run_dir / "log.txt", log.to_text());
  }
  return res;
}

MotionStats motion_stats(const std::vector<Trajectory>& distorted_tracks, const Video& restored,
                         const PipelineConfig& cfg) {
  MotionStats st;
  st.sigma_motion = sigma_motion(distorted_tracks);
  std::vector<Point2> seeds;
  std::vector<int> ids;
  const int w = restored.width();
  const int h = restored.height();
  for (const Trajectory& tr : distorted_tracks) {
    if (!tr.valid) continue;
    const DisplacementTrajectory d = to_displacement(tr, cfg.anchor);
    if (d.anchor.x < 0 || d.anchor.y < 0 || d.anchor.x > w - 1 || d.anchor.y > h - 1) continue;
    seeds.push_back(d.anchor);
    ids.push_back(tr.id);
  }
  if (seeds.empty()) throw DataError("motion_stats: no valid trajectories to compare");
  std::vector<Trajectory> after = track(restored, seeds, cfg.tracker);

  std::map<int, const Trajectory*> by_id;
  for (const Trajectory& tr : distorted_tracks) by_id[tr.id] = &tr;
  std::vector<DisplacementTrajectory> before_d, after_d;
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (!after[i].valid) continue;
    after[i].id = ids[i];
    DisplacementTrajectory b = to_displacement(*by_id.at(ids[i]), cfg.anchor);
    double energy = 0.0;
    for (const Displacement2& o : b.offsets) energy += o.dx * o.dx + o.dy * o.dy;
    if (!(energy > 0)) continue;
    before_d.push_back(std::move(b));
    after_d.push_back(to_displacement(after[i], cfg.anchor));
  }
  if (before_d.empty()) throw DataError("motion_stats: no trajectory could be re-tracked in the restored video");
  st.matched = before_d.size();
  st.mr = motion_reduction(before_d, after_d);
  return st;
}

}  // namespace wavecs
