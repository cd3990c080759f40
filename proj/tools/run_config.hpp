#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "maploc/camera.hpp"
#include "maploc/map_store.hpp"
#include "maploc/occlusion.hpp"
#include "maploc/refine.hpp"
#include "maploc/schedule.hpp"
#include "maploc/se3.hpp"

namespace maploc::cli {

inline constexpr const char* kDatasetEnv = "MAPLOC_DATASET";
inline constexpr const char* kSyntheticDataset = "synthetic";

/// Settings shared by all subcommands. Every field has a config-file key of
/// the same name (dashes replaced by underscores); command-line flags win.
struct RunConfig {
  std::string dataset;  ///< KITTI odometry root or "synthetic"
  std::string sequence = "00";
  std::string map;  ///< map file; empty = bundled scene / error for KITTI
  double map_resolution = 0.1;
  CropSpec crop;
  int occlusion_window = 5;
  double occlusion_th = 3.0;
  bool no_occlusion = false;
  double noise_t = 2.0;   ///< m
  double noise_r = 10.0;  ///< deg
  int stages = 0;         ///< 0 = every stage of the schedule
  std::string regressor = "grid";
  std::uint64_t seed = 0;
  int jobs = 1;
  int frames = 10;
  int first_frame = 0;
  std::string out = "out";
  bool no_timestamp = false;

  KeyValueConfig extra;  ///< stage.* and regressor.* keys of the config file

  OcclusionParams occlusion() const;
  NoiseSpec noise() const;
  std::vector<StageSpec> schedule() const;
};

/// Fills `cfg` from a config file; keys already set on the command line (as
/// listed in `explicit_keys`) are left alone. Unknown keys raise ConfigError.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path,
                       const std::vector<std::string>& explicit_keys);

/// Range checks; the error names the offending key.
void validate(const RunConfig& cfg);

/// Everything a subcommand needs to know about the input data.
struct Dataset {
  std::shared_ptr<const PointCloudMap> map;
  CameraModel camera;
  std::vector<PoseSE3> poses;  ///< ground-truth camera-from-map poses
  std::function<RgbImage(int)> image;
  bool synthetic = false;
};

/// `need_map`: load (or generate) the map as well.
Dataset open_dataset(const RunConfig& cfg, bool need_map);

/// Frame indices selected by first_frame / frames, clipped to the sequence.
std::vector<int> selected_frames(const RunConfig& cfg, const Dataset& data);

/// Initial pose of frame `frame`; the same draw in `perturb` and `refine`.
PoseSE3 initial_pose(const RunConfig& cfg, const PoseSE3& h_gt, int frame);

}  // namespace maploc::cli
