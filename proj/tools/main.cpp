#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "commands.hpp"
#include "maploc/error.hpp"

namespace {

using maploc::cli::RunConfig;

void report(const std::string& kind, const std::string& key, const std::string& message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  if (!key.empty()) j["key"] = key;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

/// Registers the shared flags on `sub`; `names` maps each option to its config key.
void add_common(CLI::App& sub, RunConfig& cfg, std::string& config_path,
                std::vector<std::pair<CLI::Option*, std::string>>& names) {
  const auto track = [&](CLI::Option* opt, const std::string& key) { names.emplace_back(opt, key); };
  sub.add_option("--config", config_path, "key = value file; command-line flags take precedence");
  track(sub.add_option("--dataset", cfg.dataset, "KITTI odometry root or 'synthetic'"), "dataset");
  track(sub.add_option("--sequence", cfg.sequence, "sequence id"), "sequence");
  track(sub.add_option("--map", cfg.map, "map file written by build-map"), "map");
  track(sub.add_option("--map-resolution", cfg.map_resolution, "voxel size, m"), "map_resolution");
  track(sub.add_option("--crop-forward", cfg.crop.forward, "crop extent ahead of the camera, m"), "crop_forward");
  track(sub.add_option("--crop-lateral", cfg.crop.lateral, "crop half-width, m"), "crop_lateral");
  track(sub.add_option("--crop-vertical", cfg.crop.vertical, "crop half-height, m"), "crop_vertical");
  track(sub.add_option("--occlusion-window", cfg.occlusion_window, "odd neighbourhood size"), "occlusion_window");
  track(sub.add_option("--occlusion-th", cfg.occlusion_th, "occlusion threshold"), "occlusion_th");
  track(sub.add_flag("--no-occlusion", cfg.no_occlusion, "skip the occlusion filter"), "no_occlusion");
  track(sub.add_option("--noise-t", cfg.noise_t, "initial translation noise, m"), "noise_t");
  track(sub.add_option("--noise-r", cfg.noise_r, "initial rotation noise, deg"), "noise_r");
  track(sub.add_option("--stages", cfg.stages, "run only the first n stages"), "stages");
  track(sub.add_option("--regressor", cfg.regressor, "regressor id for the default schedule"), "regressor");
  track(sub.add_option("--seed", cfg.seed, "random seed"), "seed");
  track(sub.add_option("--jobs", cfg.jobs, "worker threads"), "jobs");
  track(sub.add_option("--frames", cfg.frames, "number of frames"), "frames");
  track(sub.add_option("--first-frame", cfg.first_frame, "first frame index"), "first_frame");
  track(sub.add_option("--out", cfg.out, "output directory"), "out");
  track(sub.add_flag("--no-timestamp", cfg.no_timestamp, "byte-stable outputs"), "no_timestamp");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Camera localization against a LiDAR map"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::vector<std::pair<CLI::Option*, std::string>> names;
  maploc::cli::RenderArgs render;
  maploc::cli::EvalArgs eval;
  maploc::cli::BenchArgs bench;

  auto* build_map = app.add_subcommand("build-map", "aggregate scans into a map");
  auto* render_cmd = app.add_subcommand("render", "render the depth image seen from a pose");
  auto* perturb = app.add_subcommand("perturb", "draw initial poses");
  auto* refine = app.add_subcommand("refine", "run the iterative refinement");
  auto* eval_cmd = app.add_subcommand("eval", "summarize a trace file");
  auto* bench_cmd = app.add_subcommand("bench", "time the per-frame pipeline");
  for (CLI::App* sub : {build_map, render_cmd, perturb, refine, eval_cmd, bench_cmd}) {
    add_common(*sub, cfg, config_path, names);
  }
  int frame = -1;
  auto* frame_opt = render_cmd->add_option("--frame", frame, "frame index");
  render_cmd->add_option("--pose", render.pose, "12 numbers of the camera-from-map [R|T]");
  render_cmd->add_option("--name", render.name, "output file prefix");
  render_cmd->add_flag("--pad", render.pad, "pad to a multiple of 64");
  eval_cmd->add_option("--traces", eval.traces, "trace CSV (default <out>/traces.csv)");
  bench_cmd->add_option("--repetitions", bench.repetitions, "timed repetitions per frame");
  bench_cmd->add_option("--warmup", bench.warmup, "untimed repetitions per frame (>= 3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("usage", "", e.what());
    return 2;
  }

  try {
    std::vector<std::string> explicit_keys;
    for (const auto& [opt, key] : names) {
      if (opt->count() > 0) explicit_keys.push_back(key);
    }
    const bool has_dataset = std::find(explicit_keys.begin(), explicit_keys.end(), "dataset") != explicit_keys.end();
    if (!config_path.empty()) maploc::cli::apply_config_file(cfg, config_path, explicit_keys);
    if (!has_dataset && cfg.dataset.empty()) {
      if (const char* env = std::getenv(maploc::cli::kDatasetEnv)) cfg.dataset = env;
    }
    maploc::cli::validate(cfg);
    if (frame_opt->count() > 0) render.frame = frame;
    bench.regressor_given = std::find(explicit_keys.begin(), explicit_keys.end(), "regressor") != explicit_keys.end();

    if (build_map->parsed()) return maploc::cli::cmd_build_map(cfg);
    if (render_cmd->parsed()) return maploc::cli::cmd_render(cfg, render);
    if (perturb->parsed()) return maploc::cli::cmd_perturb(cfg);
    if (refine->parsed()) return maploc::cli::cmd_refine(cfg);
    if (eval_cmd->parsed()) return maploc::cli::cmd_eval(cfg, eval);
    if (bench_cmd->parsed()) return maploc::cli::cmd_bench(cfg, bench);
  } catch (const maploc::ConfigError& e) {
    report("config", e.key(), e.what());
    return 2;
  } catch (const std::exception& e) {
    report("runtime", "", e.what());
    return 1;
  }
  return 0;
}
