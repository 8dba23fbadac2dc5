// wavecs: simulate, track, restore, evaluate and benchmark underwater videos.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wavecs/error.hpp"
#include "wavecs/image_io.hpp"
#include "wavecs/metrics.hpp"
#include "wavecs/parallel.hpp"
#include "wavecs/pipeline.hpp"
#include "wavecs/simd/kernels.hpp"
#include "wavecs/wave_sim.hpp"

namespace fs = std::filesystem;
using namespace wavecs;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw DataError("cannot open " + p.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Flags that override the config file when given.
struct Overrides {
  std::string config;
  std::string mode;
  std::string aggregation;
  int downsample = 0;
  double lambda = -1;
  bool no_cv = false;
  int max_features = -1;
  int peof_passes = 0;
  long long seed = -1;

  void add_to(CLI::App* app, bool with_mode) {
    app->add_option("-c,--config", config, "JSON config file");
    if (with_mode) app->add_option("-m,--mode", mode, "cs | peof | cs_peof");
    app->add_option("--aggregation", aggregation, "mean | median");
    app->add_option("--downsample", downsample, "spatial factor of the CS grid");
    app->add_option("--lambda", lambda, "fixed LASSO weight (disables cross-validation)");
    app->add_flag("--no-cv", no_cv, "skip cross-validation and use lambda_rel");
    app->add_option("--max-features", max_features, "cap on tracked points (0 = no cap)");
    app->add_option("--peof-passes", peof_passes, "optical-flow registration passes");
    app->add_option("--seed", seed, "seed for every random choice");
  }

  PipelineConfig resolve() const {
    PipelineConfig c = config.empty() ? PipelineConfig{} : config_from_json(slurp(config));
    if (!mode.empty()) c.mode = mode_from_string(mode);
    if (!aggregation.empty()) c.aggregation = aggregation_from_string(aggregation);
    if (downsample > 0) c.solver.downsample = downsample;
    if (lambda >= 0) {
      c.solver.lambda = lambda;
      c.cross_validate = false;
    }
    if (no_cv) c.cross_validate = false;
    if (max_features >= 0) c.detector.max_features = max_features;
    if (peof_passes > 0) c.peof_passes = peof_passes;
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    validate(c);
    return c;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Restore videos of static scenes seen through a wavy water surface."};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: WAVECS_THREADS or all cores)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Render a distorted video with a known motion field");
  std::string sim_scene = "texture", sim_clean, sim_out;
  int sim_w = 256, sim_h = 256, sim_t = 101, sim_k = 3;
  double sim_sigma = 6.0, sim_noise = 0.0;
  std::uint64_t sim_seed = 1;
  sim->add_option("--scene", sim_scene, "texture | checker | blocks");
  sim->add_option("--clean", sim_clean, "use this image as the clean scene instead");
  sim->add_option("--width", sim_w);
  sim->add_option("--height", sim_h);
  sim->add_option("--frames", sim_t);
  sim->add_option("--waves", sim_k, "number of sinusoidal surface components");
  sim->add_option("--sigma-motion", sim_sigma, "target RMS displacement, px");
  sim->add_option("--noise", sim_noise, "sensor noise std-dev");
  sim->add_option("--seed", sim_seed);
  sim->add_option("-o,--out", sim_out, "output directory")->required();

  // track
  auto* trk = app.add_subcommand("track", "Detect and track salient points");
  std::string trk_in, trk_out;
  Overrides trk_ov;
  trk->add_option("-i,--input", trk_in, "frame directory")->required();
  trk->add_option("-o,--out", trk_out, "trajectory CSV")->required();
  trk_ov.add_to(trk, false);

  // restore
  auto* rst = app.add_subcommand("restore", "Restore a distorted video");
  std::string rst_in, rst_dir;
  Overrides rst_ov;
  rst->add_option("-i,--input", rst_in, "frame directory")->required();
  rst->add_option("-o,--run-dir", rst_dir, "directory for the restored video and stage artifacts")->required();
  rst_ov.add_to(rst, true);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score a restored image against the clean one");
  std::string ev_img, ev_truth, ev_distorted, ev_restored;
  Overrides ev_ov;
  ev->add_option("--image", ev_img, "restored mean image")->required();
  ev->add_option("--truth", ev_truth, "clean reference image")->required();
  ev->add_option("--distorted", ev_distorted, "distorted frame directory (enables MR and sigma_motion)");
  ev->add_option("--restored", ev_restored, "restored frame directory (enables MR and sigma_motion)");
  ev_ov.add_to(ev, false);

  // bench
  auto* bn = app.add_subcommand("bench", "Run every mode on every scene of a manifest");
  std::string bn_manifest, bn_out, bn_work;
  std::vector<std::string> bn_modes{"cs", "peof", "cs_peof"};
  Overrides bn_ov;
  bn->add_option("--manifest", bn_manifest, "JSON scene list")->required();
  bn->add_option("-o,--out", bn_out, "CSV output")->required();
  bn->add_option("--modes", bn_modes, "modes to run")->delimiter(',');
  bn->add_option("--work-dir", bn_work, "keep per-run artifacts here");
  bn_ov.add_to(bn, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (threads > 0) set_worker_count(static_cast<unsigned>(threads));

  if (*sim) {
    Frame clean = sim_clean.empty() ? make_test_scene(scene_kind_from_string(sim_scene), sim_w, sim_h, sim_seed)
                                    : center_crop_resize(read_image(sim_clean), sim_w, sim_h);
    RandomModelOptions opts;
    opts.width = sim_w;
    opts.height = sim_h;
    opts.frames = sim_t;
    const SurfaceModel model = random_model(sim_seed, sim_k, sim_sigma, opts);
    SynthesisOptions so;
    so.noise_sigma = sim_noise;
    const GroundTruthBundle gt = synthesize(clean, model, sim_t, sim_seed, so);
    fs::create_directories(sim_out);
    save_sequence(gt.distorted, fs::path(sim_out) / "distorted");
    write_image(gt.clean, fs::path(sim_out) / "clean.pgm");
    write_motion_field(gt.true_field, fs::path(sim_out) / "true_field.wmvf");
    std::ofstream(fs::path(sim_out) / "model.json") << model_to_json(model, sim_seed) << '\n';
    std::cout << "wrote " << sim_t << " frames, rms displacement " << analytic_rms_displacement(model) << " px\n";
    return 0;
  }
  if (*trk) {
    const PipelineConfig cfg = trk_ov.resolve();
    const Video v = load_sequence(trk_in);
    const auto trajs = track_video(v, cfg);
    write_trajectories_csv(trajs, trk_out);
    std::size_t valid = 0;
    for (const auto& t : trajs) valid += t.valid;
    std::cout << "tracked=" << trajs.size() << " valid=" << valid << '\n';
    return 0;
  }
  if (*rst) {
    const PipelineConfig cfg = rst_ov.resolve();
    const Video v = load_sequence(rst_in);
    std::cerr << "kernels: " << simd::isa_name(simd::kernels().isa) << ", threads: " << worker_count() << '\n';
    const RestoreResult res = run_restore(v, cfg, fs::path(rst_dir));
    std::cout << res.log.to_text();
    return 0;
  }
  if (*ev) {
    const Frame img = read_image(ev_img);
    const Frame truth = read_image(ev_truth);
    QualityReport q = evaluate_quality(img, truth);
    if (!ev_distorted.empty() != !ev_restored.empty()) {
      throw UsageError("--distorted and --restored must be given together");
    }
    if (!ev_distorted.empty()) {
      const PipelineConfig cfg = ev_ov.resolve();
      const Video d = load_sequence(ev_distorted);
      const Video r = load_sequence(ev_restored);
      const MotionStats ms = motion_stats(track_video(d, cfg), r, cfg);
      q.details["mr"] = std::to_string(ms.mr);
      q.details["sigma_motion"] = std::to_string(ms.sigma_motion);
      q.details["mr.matched"] = std::to_string(ms.matched);
    }
    std::cout << q.to_text();
    return 0;
  }
  if (*bn) {
    const PipelineConfig cfg = bn_ov.resolve();
    std::vector<Mode> modes;
    for (const auto& m : bn_modes) modes.push_back(mode_from_string(m));
    std::optional<fs::path> work;
    if (!bn_work.empty()) work = fs::path(bn_work);
    const auto rows = run_benchmark(read_manifest(bn_manifest), modes, cfg, bn_out, work);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.status != "ok";
    std::cout << rows.size() << " rows, " << failed << " failed\n";
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
