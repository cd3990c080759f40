#include "commands.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <iostream>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "json.hpp"

#include "maploc/error.hpp"
#include "maploc/eval.hpp"
#include "maploc/file_io.hpp"
#include "maploc/image.hpp"
#include "maploc/kitti_io.hpp"
#include "maploc/projection.hpp"
#include "maploc/random.hpp"
#include "maploc/synthetic.hpp"

namespace maploc::cli {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
using Json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::filesystem::path out_dir(const RunConfig& cfg) {
  std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string frame_name(int frame) {
  std::string s = std::to_string(frame);
  return "frame_" + std::string(6 - std::min<std::size_t>(6, s.size()), '0') + s;
}

/// Run metadata; the wall-clock timestamp is left out under --no-timestamp.
void write_run_info(const RunConfig& cfg, const std::string& command) {
  Json j;
  j["command"] = command;
  j["dataset"] = cfg.dataset;
  j["sequence"] = cfg.sequence;
  j["seed"] = cfg.seed;
  j["noise_t_m"] = cfg.noise_t;
  j["noise_r_deg"] = cfg.noise_r;
  j["regressor"] = cfg.regressor;
  if (!cfg.no_timestamp) {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["created"] = buf;
  }
  write_file_atomic(out_dir(cfg) / "run.json", j.dump(2) + "\n");
}

/// Runs fn(i) for i in [0, n) on `jobs` threads; results are stored by index
/// by the caller so the output order never depends on scheduling.
template <typename Fn>
void for_each_job(std::size_t n, int jobs, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int k = 1; k < std::min<int>(jobs, static_cast<int>(n)); ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

PoseSE3 snapped_pose(const Eigen::Matrix<double, 3, 4>& m) {
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(m.leftCols<3>(), Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) throw Error("calibration 'Tr' is not a rotation");
  Eigen::Matrix<double, 3, 4> rt;
  rt << r, m.col(3);
  return PoseSE3::from_matrix3x4(rt);
}

std::string error_csv_header() {
  std::string h = "frame";
  for (const auto& n : error_axis_names()) h += "," + n;
  return h + ",total_angle_deg,translation_m\n";
}

std::string error_csv_row(int frame, const PoseError& e) {
  std::string row = std::to_string(frame);
  for (std::size_t i = 0; i < 6; ++i) row += "," + num(i < 3 ? e.components[i] : e.components[i] / kDeg);
  return row + "," + num(e.total_angle / kDeg) + "," + num(e.translation_norm()) + "\n";
}

}  // namespace

int cmd_build_map(const RunConfig& cfg) {
  PointCloudMap map;
  if (cfg.dataset == kSyntheticDataset) {
    map = voxel_downsample(synthetic::street_scene(), cfg.map_resolution);
  } else {
    const auto paths = kitti::SequencePaths::from_root(cfg.dataset, cfg.sequence);
    if (!std::filesystem::is_directory(paths.velodyne_dir)) {
      throw ConfigError("sequence", "no velodyne directory '" + paths.velodyne_dir.string() + "'");
    }
    const std::string calib = read_file_text(paths.calib);
    const auto tr = kitti::find_calib_matrix(calib, "Tr");
    if (!tr) throw ConfigError("sequence", "calibration has no 'Tr' entry");
    const PoseSE3 cam_from_velo = snapped_pose(*tr);
    const auto map_from_cam = kitti::read_poses(read_file_text(paths.poses));
    const auto files = paths.scan_files();
    if (files.size() != map_from_cam.size()) {
      throw ConfigError("sequence", std::to_string(files.size()) + " scans but " +
                                        std::to_string(map_from_cam.size()) + " poses");
    }
    std::vector<PointCloudMap> scans;
    std::vector<PoseSE3> poses;
    for (std::size_t k = 0; k < files.size(); ++k) {
      scans.push_back(kitti::read_velodyne_file(files[k]));
      poses.push_back(pose_compose(map_from_cam[k], cam_from_velo));
    }
    map = kitti::build_map(scans, poses, cfg.map_resolution);
  }
  const auto dir = out_dir(cfg);
  save_map(map, dir / "map.bin");
  Json info;
  info["points"] = map.size();
  info["resolution"] = cfg.map_resolution;
  info["intensity"] = map.has_intensity();
  write_file_atomic(dir / "map.json", info.dump(2) + "\n");
  return 0;
}

int cmd_render(const RunConfig& cfg, const RenderArgs& args) {
  const Dataset data = open_dataset(cfg, true);
  const int frame = args.frame.value_or(cfg.first_frame);
  if (frame < 0 || static_cast<std::size_t>(frame) >= data.poses.size()) {
    throw ConfigError("frame", "index " + std::to_string(frame) + " is outside the sequence");
  }
  PoseSE3 pose = data.poses[static_cast<std::size_t>(frame)];
  if (!args.pose.empty()) {
    try {
      pose = parse_pose(args.pose);
    } catch (const Error& e) {
      throw ConfigError("pose", e.what());
    }
  }
  const std::optional<OcclusionParams> occ =
      cfg.no_occlusion ? std::nullopt : std::optional<OcclusionParams>(cfg.occlusion());
  ProjectionOptions proj;
  proj.workers = cfg.jobs;
  DepthImage depth = render_lidar_image(*data.map, pose, data.camera, cfg.crop, occ, proj);
  RgbImage rgb = data.image(frame);
  if (args.pad) {
    depth = pad_image(depth);
    rgb = pad_rgb(rgb);
  }
  const auto dir = out_dir(cfg);
  const std::string name = args.name.empty() ? frame_name(frame) : args.name;
  write_depth_png(depth, dir / (name + "_depth.png"));
  write_depth_raw(depth, dir / (name + "_depth.bin"));
  write_rgb_png(rgb, dir / (name + "_rgb.png"));
  write_rgb_png(depth_overlay(depth, &rgb), dir / (name + "_overlay.png"));
  return 0;
}

int cmd_perturb(const RunConfig& cfg) {
  const Dataset data = open_dataset(cfg, false);
  const auto frames = selected_frames(cfg, data);
  std::string init_txt, gt_txt, targets = "frame,tx,ty,tz,qa,qb,qc,qd\n";
  std::string errors = error_csv_header();
  std::vector<PoseError> all;
  for (const int f : frames) {
    const PoseSE3& gt = data.poses[static_cast<std::size_t>(f)];
    const PoseSE3 init = initial_pose(cfg, gt, f);
    init_txt += format_pose(init) + "\n";
    gt_txt += format_pose(gt) + "\n";
    // correction that takes the initial pose to the ground truth
    const PoseSE3 h_out = pose_compose(gt, pose_inverse(init));
    const Quat& q = h_out.rotation();
    targets += std::to_string(f) + "," + num(h_out.translation().x()) + "," + num(h_out.translation().y()) +
               "," + num(h_out.translation().z()) + "," + num(q.a) + "," + num(q.b) + "," + num(q.c) +
               "," + num(q.d) + "\n";
    const PoseError e = pose_error(gt, init);
    errors += error_csv_row(f, e);
    all.push_back(e);
  }
  const auto dir = out_dir(cfg);
  write_file_atomic(dir / "init_poses.txt", init_txt);
  write_file_atomic(dir / "gt_poses.txt", gt_txt);
  write_file_atomic(dir / "targets.csv", targets);
  write_file_atomic(dir / "perturbation.csv", errors);
  const ErrorSummary summary = summarize(all);
  write_file_atomic(dir / "summary.csv", summary_to_csv(std::span(&summary, 1)));
  write_file_atomic(dir / "summary.json", summary_to_json(std::span(&summary, 1)));
  write_run_info(cfg, "perturb");
  return 0;
}

int cmd_refine(const RunConfig& cfg) {
  const Dataset data = open_dataset(cfg, true);
  const auto frames = selected_frames(cfg, data);
  const auto stages = cfg.schedule();
  const auto bindings = bindings_from_config(cfg.extra);

  RefineOptions options;
  options.crop = cfg.crop;
  options.occlusion = cfg.occlusion();
  options.apply_occlusion = !cfg.no_occlusion;

  std::vector<FrameTrace> traces(frames.size());
  std::vector<PoseSE3> finals(frames.size());
  for_each_job(frames.size(), cfg.jobs, [&](std::size_t i) {
    const int f = frames[i];
    const PoseSE3& gt = data.poses[static_cast<std::size_t>(f)];
    FrameContext ctx{f, gt, data.map, data.camera, derive_seed(cfg.seed ^ 0x5eedULL, static_cast<std::uint64_t>(f))};
    const RegressorSet regressors = make_regressors(bindings, stages, ctx);
    RefineOptions opt = options;
    opt.ground_truth = gt;
    RefineResult r = refine(initial_pose(cfg, gt, f), data.image(f), *data.map, data.camera, stages,
                            regressors, opt);
    finals[i] = r.pose;
    traces[i] = {f, std::move(r.trace), r.failure};
  });

  const auto dir = out_dir(cfg);
  const bool timings = !cfg.no_timestamp;
  write_file_atomic(dir / "traces.csv", traces_to_csv(traces, timings));
  write_file_atomic(dir / "traces.json", traces_to_json(traces, timings));
  std::string final_txt;
  for (const PoseSE3& p : finals) final_txt += format_pose(p) + "\n";
  write_file_atomic(dir / "final_poses.txt", final_txt);

  std::vector<ErrorSummary> per_stage;
  for (std::size_t s = 0; s <= stages.size(); ++s) {
    std::vector<PoseError> errs;
    for (const FrameTrace& t : traces) {
      if (s < t.trace.size() && t.trace[s].error) errs.push_back(*t.trace[s].error);
    }
    if (errs.empty()) break;
    per_stage.push_back(summarize(errs));
  }
  write_file_atomic(dir / "summary.csv", summary_to_csv(per_stage));
  write_file_atomic(dir / "summary.json", summary_to_json(per_stage));
  write_run_info(cfg, "refine");

  std::size_t failed = 0;
  for (const FrameTrace& t : traces) failed += t.failure ? 1 : 0;
  if (failed > 0) {
    throw Error(std::to_string(failed) + " of " + std::to_string(traces.size()) +
                " frames failed; see traces.json");
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg, const EvalArgs& args) {
  const std::filesystem::path traces_path =
      args.traces.empty() ? std::filesystem::path(cfg.out) / "traces.csv" : std::filesystem::path(args.traces);
  if (!std::filesystem::exists(traces_path)) {
    throw ConfigError("traces", "file '" + traces_path.string() + "' does not exist");
  }
  const auto rows = read_traces_csv(read_file_text(traces_path));
  if (rows.empty()) throw ConfigError("traces", "no rows with errors in '" + traces_path.string() + "'");
  int max_stage = 0;
  for (const TraceRow& r : rows) max_stage = std::max(max_stage, r.stage);

  std::vector<ErrorSummary> per_stage;
  KdePanelSet panels;
  for (int s = 0; s <= max_stage; ++s) {
    std::vector<PoseError> errs;
    std::array<std::vector<double>, 6> axes;
    for (const TraceRow& r : rows) {
      if (r.stage != s) continue;
      errs.push_back(r.error);
      for (std::size_t a = 0; a < 6; ++a) {
        axes[a].push_back(a < 3 ? r.error.components[a] : r.error.components[a] / kDeg);
      }
    }
    if (errs.empty()) continue;
    per_stage.push_back(summarize(errs));
    if (s > 0) {
      panels.curve_labels.push_back("stage " + std::to_string(s));
      panels.samples.push_back(axes);
    }
  }
  panels.uniform_half_width = {cfg.noise_t, cfg.noise_t, cfg.noise_t, cfg.noise_r, cfg.noise_r, cfg.noise_r};

  const auto dir = out_dir(cfg);
  write_file_atomic(dir / "eval_summary.csv", summary_to_csv(per_stage));
  write_file_atomic(dir / "eval_summary.json", summary_to_json(per_stage));
  write_file_atomic(dir / "kde.svg", kde_svg(panels));
  return 0;
}

int cmd_bench(const RunConfig& cfg, const BenchArgs& args) {
  RunConfig bench_cfg = cfg;
  if (!args.regressor_given) bench_cfg.regressor = "identity";
  const Dataset data = open_dataset(bench_cfg, true);
  const auto frames = selected_frames(bench_cfg, data);
  const auto stages = bench_cfg.schedule();
  const auto bindings = bindings_from_config(bench_cfg.extra);
  const OcclusionParams occ = bench_cfg.occlusion();
  BenchmarkOptions opts{args.warmup, args.repetitions};

  TimingBreakdown all;
  for (const int f : frames) {
    const PoseSE3& gt = data.poses[static_cast<std::size_t>(f)];
    const PoseSE3 init = initial_pose(bench_cfg, gt, f);
    FrameContext ctx{f, gt, data.map, data.camera, bench_cfg.seed};
    const RegressorSet regs = make_regressors(bindings, std::span(stages).first(1), ctx);
    Regressor& regressor = *regs.at(stages.front().regressor_id);
    const RgbImage rgb = data.image(f);
    DepthImage depth, filtered;
    BenchmarkSteps steps;
    steps.z_buffer = [&] { depth = project(crop_local(*data.map, init, bench_cfg.crop), init, data.camera); };
    steps.occlusion = [&] { filtered = occlusion_filter(depth, occ, 1); };
    steps.regressor = [&] { (void)regressor.predict(rgb, filtered); };
    const TimingBreakdown t = run_benchmark(steps, opts);
    all.samples.insert(all.samples.end(), t.samples.begin(), t.samples.end());
  }

  // z-buffer cost against the number of points in the crop
  std::string scaling = "crop_forward_m,points,z_buffer_ms\n";
  const PoseSE3 pose = data.poses[static_cast<std::size_t>(frames.front())];
  for (const double forward : {5.0, 10.0, 20.0, 40.0, 80.0}) {
    CropSpec crop = bench_cfg.crop;
    crop.forward = forward;
    const PointCloudMap local = crop_local(*data.map, pose, crop);
    BenchmarkSteps steps;
    steps.z_buffer = [&] { (void)project(local, pose, data.camera); };
    const TimingBreakdown t = run_benchmark(steps, opts);
    scaling += num(forward) + "," + std::to_string(local.size()) + "," + num(t.median().z_buffer_ms) + "\n";
  }

  const auto dir = out_dir(bench_cfg);
  write_file_atomic(dir / "timing.csv", timing_to_csv(all));
  write_file_atomic(dir / "timing.json", timing_to_json(all));
  write_file_atomic(dir / "zbuffer_scaling.csv", scaling);
  const TimingSample m = all.median();
  const TimingSample& ref = kReferenceGpuTimings;
  const std::pair<const char*, std::pair<double, double>> rows[] = {
      {"z_buffer", {m.z_buffer_ms, ref.z_buffer_ms}},
      {"occlusion", {m.occlusion_ms, ref.occlusion_ms}},
      {"regressor", {m.regressor_ms, ref.regressor_ms}},
      {"total", {m.total_ms, ref.total_ms}}};
  std::printf("%-10s %12s %18s\n", "step", "median_ms", "reference_gpu_ms");
  for (const auto& [name, v] : rows) std::printf("%-10s %12.3f %18.1f\n", name, v.first, v.second);
  return 0;
}

}  // namespace maploc::cli
