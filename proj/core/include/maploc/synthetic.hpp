#pragma once

#include <cstdint>
#include <vector>

#include "maploc/camera.hpp"
#include "maploc/image.hpp"
#include "maploc/map_store.hpp"
#include "maploc/se3.hpp"

namespace maploc::synthetic {

/// Procedural street scene (map frame: x along the street, y left, z up):
/// ground plane, building facades with varying setbacks, an end wall, poles,
/// parked boxes and trees. About 50k points with intensity; deterministic.
PointCloudMap street_scene(std::uint64_t seed = 7);

/// 320x112 pinhole camera, fx = fy = 160, principal point (160, 56).
CameraModel street_camera();

/// Camera-from-map pose of a forward-looking camera at `center` (map frame)
/// with heading `yaw` (radians, about map z; 0 looks along +x).
PoseSE3 camera_pose(const Eigen::Vector3d& center, double yaw);

/// `count` ground-truth camera poses driving along the street at 1.65 m height.
std::vector<PoseSE3> street_trajectory(int count, std::uint64_t seed = 11);

/// Stand-in for the camera image: intensity splat of the scene, shaded by depth.
RgbImage camera_image(const PointCloudMap& scene, const PoseSE3& pose, const CameraModel& cam);

/// Sparse wall 10 m in front of an identity-pose camera with a wider fence 4 m
/// behind it; fence points show through the gaps of the projected wall.
struct WallFenceFixture {
  PointCloudMap cloud;
  PoseSE3 pose;
  CameraModel camera;
  double wall_depth = 10.0;
  double fence_depth = 14.0;
  double wall_half_width = 3.0;   ///< camera-frame |x| extent of the wall
  double wall_half_height = 2.0;  ///< camera-frame |y| extent of the wall
};

WallFenceFixture wall_fence();

}  // namespace maploc::synthetic
