#pragma once

#include <cstdint>

#include "maploc/camera.hpp"
#include "maploc/image.hpp"
#include "maploc/map_store.hpp"
#include "maploc/se3.hpp"

namespace maploc {

struct ProjectionOptions {
  double z_near = 0.05;  ///< meters; closer points are discarded
  int workers = 1;       ///< output is bit-identical for any worker count
};

/// Renders the LiDAR-image of `cloud` seen by `cam` at camera-from-map pose `h`.
/// Each point lands on pixel (round(x'/w'), round(y'/w')) of P * [R p + t; 1];
/// a pixel keeps the smallest camera-frame z that reaches it (z-buffer).
DepthImage project(const PointCloudMap& cloud, const PoseSE3& h, const CameraModel& cam,
                   const ProjectionOptions& options = {});

/// Zero-pads right/bottom to the next multiple of `multiple`. The principal
/// point is untouched; padding always follows projection.
DepthImage pad_image(const DepthImage& img, int multiple = 64);
RgbImage pad_rgb(const RgbImage& img, int multiple = 64);

/// Draws of one augmentation; see sample_augmentation for the ranges.
struct AugmentDraw {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  bool mirror = false;
  double rotation = 0.0;  ///< radians about the optical axis
};

struct AugmentParams {
  double jitter_min = 0.9;  ///< brightness, contrast and saturation factor range
  double jitter_max = 1.1;
  double mirror_probability = 0.5;
  double max_rotation = 5.0 * 3.14159265358979323846 / 180.0;  ///< radians
};

AugmentDraw sample_augmentation(const AugmentParams& params, std::uint64_t seed);

struct AugmentResult {
  RgbImage rgb;
  PointCloudMap cloud;  ///< mirrored in the map frame when the draw mirrors
  PoseSE3 pose;         ///< renders a LiDAR-image aligned with `rgb` from `cloud`
};

/// Colour jitter acts on the RGB image only. Mirroring flips the image
/// horizontally and conjugates the pose by diag(-1, 1, 1) (the cloud is
/// mirrored in the map frame accordingly). The optical-axis rotation rotates
/// the image about the principal point and composes Rz(rotation) onto the pose.
AugmentResult apply_augmentation(const RgbImage& rgb, const PointCloudMap& cloud,
                                 const PoseSE3& h_gt, const CameraModel& cam,
                                 const AugmentDraw& draw);

AugmentResult augment(const RgbImage& rgb, const PointCloudMap& cloud, const PoseSE3& h_gt,
                      const CameraModel& cam, const AugmentParams& params, std::uint64_t seed);

/// torchvision-style colour jitter: brightness scales, contrast blends with
/// the mean gray level, saturation blends with the per-pixel gray value.
RgbImage color_jitter(const RgbImage& rgb, double brightness, double contrast, double saturation);
RgbImage mirror_rgb(const RgbImage& rgb);
/// Nearest-neighbour rotation about (cx, cy). Positive angles turn the content
/// counter-clockwise as displayed (image y axis pointing down).
RgbImage rotate_rgb(const RgbImage& rgb, double angle, double cx, double cy);

/// Pose conjugated by the mirror diag(-1, 1, 1): M * H * M.
PoseSE3 mirror_pose(const PoseSE3& h);
/// Negates the map-frame x coordinate of every point.
PointCloudMap mirror_cloud(const PointCloudMap& cloud);

}  // namespace maploc
