#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maploc/camera.hpp"
#include "maploc/map_store.hpp"
#include "maploc/refine.hpp"
#include "maploc/se3.hpp"

namespace maploc {

/// Flat "key = value" text. '#' starts a comment, blank lines are ignored and
/// a key may appear only once. Typed getters raise ConfigError naming the key.
class KeyValueConfig {
public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_doubles(const std::string& key) const;
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Canonical text: sorted keys, one "key = value" per line.
  std::string to_text() const;

private:
  std::map<std::string, std::string> entries_;
};

enum class RegressorKind { kIdentity, kOracle, kGridSearch, kExternal };

/// Declarative regressor binding.
///
///   regressor.<id>.type        identity | oracle | grid | external
///   regressor.<id>.contraction oracle: 0 = exact correction, 1 = none (0.5)
///   regressor.<id>.noise_t     oracle: residual translation noise, m (0)
///   regressor.<id>.noise_r     oracle: residual rotation noise, deg (0)
///   regressor.<id>.steps       grid: six step counts "x,y,z,roll,yaw,pitch"
///   regressor.<id>.extents     grid: six half-widths, m for x,y,z and deg for angles
///   regressor.<id>.levels      grid: coarse-to-fine repetitions
///   regressor.<id>.shrink      grid: extent factor between levels
///   regressor.<id>.min_overlap grid: co-nonzero pixels needed per candidate (50)
///   regressor.<id>.point_stride grid: candidates render every n-th map point (1)
///   regressor.<id>.spool       external: spool directory
///   regressor.<id>.timeout_ms  external: response timeout (60000)
///
/// The ids "identity", "oracle", "grid" and "external" are predeclared with
/// the defaults of their kind.
struct RegressorBinding {
  std::string id;
  RegressorKind kind = RegressorKind::kIdentity;
  double contraction = 0.5;
  NoiseSpec residual_noise;
  GridSpec grid;
  std::filesystem::path spool_dir = "spool";
  std::chrono::milliseconds timeout{60000};
};

/// Grid used by the predeclared "grid" binding: 3 steps per axis, extents
/// 1 m / 5 deg halved over 6 levels, reaching about 2 m / 10 deg.
GridSpec default_grid();

using RegressorBindings = std::map<std::string, RegressorBinding>;

RegressorBindings bindings_from_config(const KeyValueConfig& cfg);

/// Schedule keys:
///
///   stages                     number of stages (absent: the default 3 stages)
///   stage.<n>.regressor        regressor id, n = 1..stages
///   stage.<n>.max_translation  m
///   stage.<n>.max_rotation     deg
///
/// Without a "stages" key the default schedule bound to `regressor_id` is used.
std::vector<StageSpec> schedule_from_config(const KeyValueConfig& cfg,
                                            const std::string& regressor_id);

/// Everything a regressor binding may need to instantiate for one frame.
struct FrameContext {
  int frame = 0;
  std::optional<PoseSE3> ground_truth;
  std::shared_ptr<const PointCloudMap> map;
  CameraModel camera;
  std::uint64_t seed = 0;
};

/// Instantiates every regressor referenced by `stages`. Oracle and grid
/// bindings need the frame's ground truth; the grid reference is the
/// z-buffer rendering at the ground-truth pose.
RegressorSet make_regressors(const RegressorBindings& bindings, std::span<const StageSpec> stages,
                             const FrameContext& ctx);

}  // namespace maploc
