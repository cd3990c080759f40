#include "run_config.hpp"

#include <algorithm>
#include <cstdlib>
#include <numbers>

#include "maploc/error.hpp"
#include "maploc/file_io.hpp"
#include "maploc/image.hpp"
#include "maploc/kitti_io.hpp"
#include "maploc/random.hpp"
#include "maploc/synthetic.hpp"

namespace maploc::cli {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

bool listed(const std::vector<std::string>& keys, const std::string& key) {
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

}  // namespace

OcclusionParams RunConfig::occlusion() const {
  return OcclusionParams::from_threshold(occlusion_window, occlusion_th);
}

NoiseSpec RunConfig::noise() const { return {noise_t, noise_r * kDeg}; }

std::vector<StageSpec> RunConfig::schedule() const {
  std::vector<StageSpec> s = schedule_from_config(extra, regressor);
  if (stages > 0 && static_cast<std::size_t>(stages) < s.size()) s.resize(static_cast<std::size_t>(stages));
  return s;
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path,
                       const std::vector<std::string>& explicit_keys) {
  if (!std::filesystem::exists(path)) throw ConfigError("config", "file '" + path.string() + "' does not exist");
  const KeyValueConfig file = KeyValueConfig::load(path);
  for (const auto& [key, value] : file.entries()) {
    if (key == "stages" || key.rfind("stage.", 0) == 0 || key.rfind("regressor.", 0) == 0) {
      if (key == "stages" && listed(explicit_keys, "stages")) continue;
      cfg.extra.set(key, value);
      continue;
    }
    if (listed(explicit_keys, key)) continue;
    const auto num = [&] { return file.get_double(key, 0.0); };
    const auto integer = [&] { return static_cast<int>(file.get_int(key, 0)); };
    const auto flag = [&] {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw ConfigError(key, "expected true or false");
    };
    if (key == "dataset") cfg.dataset = value;
    else if (key == "sequence") cfg.sequence = value;
    else if (key == "map") cfg.map = value;
    else if (key == "map_resolution") cfg.map_resolution = num();
    else if (key == "crop_forward") cfg.crop.forward = num();
    else if (key == "crop_lateral") cfg.crop.lateral = num();
    else if (key == "crop_vertical") cfg.crop.vertical = num();
    else if (key == "occlusion_window") cfg.occlusion_window = integer();
    else if (key == "occlusion_th") cfg.occlusion_th = num();
    else if (key == "no_occlusion") cfg.no_occlusion = flag();
    else if (key == "noise_t") cfg.noise_t = num();
    else if (key == "noise_r") cfg.noise_r = num();
    else if (key == "regressor") cfg.regressor = value;
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(file.get_int(key, 0));
    else if (key == "jobs") cfg.jobs = integer();
    else if (key == "frames") cfg.frames = integer();
    else if (key == "first_frame") cfg.first_frame = integer();
    else if (key == "out") cfg.out = value;
    else if (key == "no_timestamp") cfg.no_timestamp = flag();
    else throw ConfigError(key, "unknown configuration key");
  }
  // "stages" on the command line truncates; in the file it declares the schedule
  if (file.has("stages") && !listed(explicit_keys, "stages")) cfg.stages = 0;
}

void validate(const RunConfig& cfg) {
  if (cfg.dataset.empty()) {
    throw ConfigError("dataset", std::string("not set (use --dataset or ") + kDatasetEnv + ")");
  }
  if (cfg.dataset != kSyntheticDataset && !std::filesystem::is_directory(cfg.dataset)) {
    throw ConfigError("dataset", "path '" + cfg.dataset + "' does not exist");
  }
  if (!cfg.map.empty() && !std::filesystem::exists(cfg.map)) {
    throw ConfigError("map", "file '" + cfg.map + "' does not exist");
  }
  if (!(cfg.map_resolution > 0.0)) throw ConfigError("map_resolution", "must be > 0");
  if (!(cfg.crop.forward > 0.0)) throw ConfigError("crop_forward", "must be > 0");
  if (!(cfg.crop.lateral > 0.0)) throw ConfigError("crop_lateral", "must be > 0");
  if (!(cfg.crop.vertical > 0.0)) throw ConfigError("crop_vertical", "must be > 0");
  if (cfg.occlusion_window < 3 || cfg.occlusion_window % 2 == 0) {
    throw ConfigError("occlusion_window", "must be odd and >= 3");
  }
  if (!(cfg.occlusion_th > 0.0)) throw ConfigError("occlusion_th", "must be > 0");
  if (!(cfg.noise_t >= 0.0)) throw ConfigError("noise_t", "must be >= 0");
  if (!(cfg.noise_r >= 0.0 && cfg.noise_r < 90.0)) throw ConfigError("noise_r", "must lie in [0, 90)");
  if (cfg.stages < 0) throw ConfigError("stages", "must be >= 0");
  if (cfg.jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (cfg.frames < 1) throw ConfigError("frames", "must be >= 1");
  if (cfg.first_frame < 0) throw ConfigError("first_frame", "must be >= 0");
  if (cfg.out.empty()) throw ConfigError("out", "must not be empty");
  const auto bindings = bindings_from_config(cfg.extra);
  for (const StageSpec& s : cfg.schedule()) {
    if (bindings.count(s.regressor_id) == 0) {
      throw ConfigError("regressor", "unknown regressor id '" + s.regressor_id + "'");
    }
  }
}

namespace {

Dataset open_synthetic(const RunConfig& cfg, bool need_map) {
  Dataset d;
  d.synthetic = true;
  d.camera = synthetic::street_camera();
  const int count = std::max(cfg.first_frame + cfg.frames, 1);
  d.poses = synthetic::street_trajectory(count);
  auto scene = std::make_shared<PointCloudMap>(cfg.map.empty() ? synthetic::street_scene()
                                                               : load_map(cfg.map));
  if (need_map) d.map = scene;
  const CameraModel cam = d.camera;
  const auto poses = d.poses;
  // the stand-in camera image always comes from the full-detail scene
  d.image = [scene, cam, poses](int frame) {
    return synthetic::camera_image(*scene, poses.at(static_cast<std::size_t>(frame)), cam);
  };
  return d;
}

std::filesystem::path frame_image(const kitti::SequencePaths& paths, int frame) {
  std::string name = std::to_string(frame);
  name.insert(0, 6 - std::min<std::size_t>(6, name.size()), '0');
  return paths.image_dir / (name + ".png");
}

Dataset open_kitti(const RunConfig& cfg, bool need_map) {
  const auto paths = kitti::SequencePaths::from_root(cfg.dataset, cfg.sequence);
  if (!std::filesystem::exists(paths.poses)) {
    throw ConfigError("sequence", "no poses file '" + paths.poses.string() + "'");
  }
  if (!std::filesystem::exists(paths.calib)) {
    throw ConfigError("sequence", "no calibration file '" + paths.calib.string() + "'");
  }
  Dataset d;
  const std::vector<PoseSE3> map_from_cam = kitti::read_poses(read_file_text(paths.poses));
  for (const PoseSE3& p : map_from_cam) d.poses.push_back(pose_inverse(p));

  const RgbImage first = read_rgb_png(frame_image(paths, 0));
  d.camera = kitti::read_calib(read_file_text(paths.calib), first.width, first.height);
  d.image = [paths](int frame) { return read_rgb_png(frame_image(paths, frame)); };
  if (need_map) {
    if (cfg.map.empty()) throw ConfigError("map", "required for KITTI data (run build-map first)");
    d.map = std::make_shared<PointCloudMap>(load_map(cfg.map));
  }
  return d;
}

}  // namespace

Dataset open_dataset(const RunConfig& cfg, bool need_map) {
  return cfg.dataset == kSyntheticDataset ? open_synthetic(cfg, need_map) : open_kitti(cfg, need_map);
}

std::vector<int> selected_frames(const RunConfig& cfg, const Dataset& data) {
  std::vector<int> frames;
  for (int k = cfg.first_frame; k < cfg.first_frame + cfg.frames; ++k) {
    if (static_cast<std::size_t>(k) >= data.poses.size()) break;
    frames.push_back(k);
  }
  if (frames.empty()) throw ConfigError("first_frame", "selects no frame of the sequence");
  return frames;
}

PoseSE3 initial_pose(const RunConfig& cfg, const PoseSE3& h_gt, int frame) {
  return sample_init_pose(h_gt, cfg.noise(), derive_seed(cfg.seed, static_cast<std::uint64_t>(frame)));
}

}  // namespace maploc::cli
