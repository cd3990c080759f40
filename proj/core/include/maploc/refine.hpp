#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maploc/camera.hpp"
#include "maploc/error.hpp"
#include "maploc/image.hpp"
#include "maploc/losses.hpp"
#include "maploc/map_store.hpp"
#include "maploc/occlusion.hpp"
#include "maploc/projection.hpp"
#include "maploc/se3.hpp"

namespace maploc {

/// Anything that turns an (RGB, LiDAR-image) pair into the correction H_out.
/// The corrected pose is pose_compose(H_out, current). Implementations must
/// not modify their inputs; the returned rotation must be non-zero.
class Regressor {
public:
  virtual ~Regressor() = default;
  virtual PoseTarget predict(const RgbImage& rgb, const DepthImage& lidar_image) = 0;
};

/// Predicts no correction.
class IdentityRegressor final : public Regressor {
public:
  PoseTarget predict(const RgbImage&, const DepthImage&) override { return {}; }
};

/// The exact correction towards `h_gt`, pulled back towards identity by
/// `contraction` (0 = exact, 1 = no correction), followed by residual noise.
///
/// With E = h_current * h_gt^-1 (camera-centre offset d, rotation angle theta),
/// the corrected pose has error E' with offset contraction * d and rotation
/// angle contraction * theta about the same axis.
PoseTarget oracle_correction(const PoseSE3& h_current, const PoseSE3& h_gt, double contraction,
                             const NoiseSpec& residual_noise, std::uint64_t seed);

/// Test double standing in for a learned regressor. The current pose is read
/// from the LiDAR-image's generating pose; call k uses derive_seed(seed, k).
class OracleRegressor final : public Regressor {
public:
  OracleRegressor(const PoseSE3& h_gt, double contraction, const NoiseSpec& residual_noise = {},
                  std::uint64_t seed = 0);
  PoseTarget predict(const RgbImage& rgb, const DepthImage& lidar_image) override;

private:
  PoseSE3 h_gt_;
  double contraction_;
  NoiseSpec noise_;
  std::uint64_t seed_;
  std::uint64_t calls_ = 0;
};

/// Raised when no grid candidate shares enough pixels with the reference.
class InsufficientOverlap : public Error {
public:
  using Error::Error;
};

/// Six-axis search grid around the current pose. Axis order: lateral (x),
/// vertical (y), longitudinal (z) camera-centre offsets in meters, then roll
/// (about z), yaw (about y), pitch (about x) in radians. An axis with n steps
/// samples n evenly spaced values over [-extent, extent] (n = 1: just 0).
/// With levels > 1 the search repeats around the best candidate with extents
/// multiplied by `shrink` each time.
struct GridSpec {
  std::array<int, 6> steps{1, 1, 1, 1, 1, 1};
  std::array<double, 6> extents{0, 0, 0, 0, 0, 0};
  int levels = 1;
  double shrink = 0.5;
  std::size_t min_overlap = 50;  ///< co-nonzero pixels needed to score a candidate
  /// A candidate also needs this fraction of the level's largest overlap.
  double min_overlap_fraction = 0.8;
  int point_stride = 1;          ///< candidates render every n-th map point
  int reference_fill = 2;        ///< empty reference pixels take the nearest depth within this radius
  double truncation = 0.0;       ///< per-pixel cap on |depth difference| in metres, 0 for none
  CropSpec crop;
  ProjectionOptions projection;

  std::size_t candidate_count() const;
  void validate() const;
  /// Correction of the flat grid index (last axis varies fastest).
  PoseSE3 candidate(std::size_t index) const;
};

/// Mean |candidate - reference| depth over co-nonzero pixels, and their count.
/// A positive `truncation` caps each pixel's difference.
struct DepthScore {
  double mean_abs_diff = 0.0;
  std::size_t overlap = 0;
};
DepthScore score_depth(const DepthImage& candidate, const DepthImage& reference, double truncation = 0.0);

/// Fills empty pixels with the smallest nonzero depth within `radius`
/// (Chebyshev distance); nonzero pixels are kept.
DepthImage fill_depth(const DepthImage& img, int radius);

/// Renders every grid candidate pose_compose(G, h_current) (z-buffer only),
/// scores it against the filled `reference` and returns the best G. Ties go to the
/// smaller correction (sqrt(|t|^2 + angle^2)), then to the lower grid index.
PoseTarget grid_search_correction(const DepthImage& reference, const PointCloudMap& map,
                                  const CameraModel& cam, const PoseSE3& h_current,
                                  const GridSpec& grid);

/// Regressor wrapper around grid_search_correction with a fixed reference
/// depth image; the current pose comes from the LiDAR-image's generating pose.
class GridSearchRegressor final : public Regressor {
public:
  GridSearchRegressor(DepthImage reference, std::shared_ptr<const PointCloudMap> map,
                      CameraModel cam, GridSpec grid);
  PoseTarget predict(const RgbImage& rgb, const DepthImage& lidar_image) override;

private:
  DepthImage reference_;
  std::shared_ptr<const PointCloudMap> map_;
  CameraModel cam_;
  GridSpec grid_;
};

/// One refinement stage: which regressor runs and the error range it is valid for.
struct StageSpec {
  std::string regressor_id;
  double max_translation = 0.0;   ///< meters, per axis
  double max_rotation_deg = 0.0;  ///< degrees, per axis
};

/// Three stages with ranges [2 m, 10 deg], [1 m, 2 deg], [0.6 m, 2 deg].
std::vector<StageSpec> default_schedule(const std::string& regressor_id = "default");
/// Non-empty, positive ranges, translation ranges non-increasing.
void validate_schedule(std::span<const StageSpec> stages);

struct StageTimings {
  double render_ms = 0.0;     ///< crop + z-buffer projection
  double occlusion_ms = 0.0;
  double regressor_ms = 0.0;
};

struct TraceEntry {
  int stage = 0;                       ///< 0 = initial estimate
  std::string regressor_id;
  PoseSE3 pose;                        ///< estimate after this stage
  std::optional<PoseSE3> render_pose;  ///< pose the stage rendered from
  std::optional<PoseError> error;      ///< vs ground truth when known
  StageTimings timings;
  bool out_of_range = false;  ///< incoming error exceeded the stage's range
};

using RefinementTrace = std::vector<TraceEntry>;

struct RefineOptions {
  CropSpec crop;
  OcclusionParams occlusion = OcclusionParams::from_threshold(5, 3.0);
  bool apply_occlusion = true;
  ProjectionOptions projection;
  std::optional<PoseSE3> ground_truth;
};

struct RefineResult {
  PoseSE3 pose;
  RefinementTrace trace;
  std::optional<std::string> failure;  ///< set when a regressor threw; trace is partial

  bool ok() const { return !failure.has_value(); }
};

using RegressorSet = std::map<std::string, std::shared_ptr<Regressor>>;

/// Renders (crop, project, occlusion filter) at the current pose, asks the
/// stage's regressor for H_out and applies it, once per stage.
RefineResult refine(const PoseSE3& h_init, const RgbImage& frame, const PointCloudMap& map,
                    const CameraModel& cam, std::span<const StageSpec> stages,
                    const RegressorSet& regressors, const RefineOptions& options = {});

/// LiDAR-image rendering used by refine: crop, project, optional occlusion filter.
DepthImage render_lidar_image(const PointCloudMap& map, const PoseSE3& pose, const CameraModel& cam,
                              const CropSpec& crop, const std::optional<OcclusionParams>& occlusion,
                              const ProjectionOptions& projection = {},
                              StageTimings* timings = nullptr);

/// Trace of one frame, as exported.
struct FrameTrace {
  int frame = 0;
  RefinementTrace trace;
  std::optional<std::string> failure;
};

/// One CSV row per stage: frame, stage, regressor, six error components,
/// total angle, translation norm, range flag and (optionally) timings.
std::string traces_to_csv(std::span<const FrameTrace> traces, bool include_timings);
std::string traces_to_json(std::span<const FrameTrace> traces, bool include_timings);

struct TraceRow {
  int frame = 0;
  int stage = 0;
  std::string regressor_id;
  PoseError error;
  bool out_of_range = false;
  StageTimings timings;
};
/// Parses traces_to_csv output (rows without errors are skipped).
std::vector<TraceRow> read_traces_csv(std::string_view text);

}  // namespace maploc
