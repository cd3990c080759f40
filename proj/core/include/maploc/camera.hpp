#pragma once

#include <Eigen/Core>

namespace maploc {

/// Pinhole camera given by a full 3x4 projection matrix (KITTI P2 style: the
/// fourth column carries the stereo-rig offset). Pixel = (x'/w', y'/w') of
/// P * [X; 1] for a camera-frame point X.
struct CameraModel {
  Eigen::Matrix<double, 3, 4> projection = Eigen::Matrix<double, 3, 4>::Zero();
  int width = 0;
  int height = 0;
  int pad_right = 0;   ///< zero until padding is applied
  int pad_bottom = 0;

  static CameraModel pinhole(double fx, double fy, double cx, double cy, int width, int height);

  double fx() const { return projection(0, 0); }
  double fy() const { return projection(1, 1); }
  double cx() const { return projection(0, 2); }
  double cy() const { return projection(1, 2); }

  int padded_width() const { return width + pad_right; }
  int padded_height() const { return height + pad_bottom; }

  /// Throws InvalidArgument when focal lengths are not positive, entries are
  /// not finite or the image is empty.
  void validate() const;

  /// Point of the camera frame where P * [X; 1] vanishes (the pinhole).
  Eigen::Vector3d projection_center() const;

  /// Camera-frame point that projects onto pixel (u, v) with camera-frame z == depth.
  Eigen::Vector3d back_project(double u, double v, double depth) const;
};

}  // namespace maploc
