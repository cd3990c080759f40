#include "maploc/camera.hpp"

#include <Eigen/Dense>

#include "maploc/error.hpp"

namespace maploc {

CameraModel CameraModel::pinhole(double fx, double fy, double cx, double cy, int width,
                                 int height) {
  CameraModel cam;
  cam.projection << fx, 0, cx, 0, 0, fy, cy, 0, 0, 0, 1, 0;
  cam.width = width;
  cam.height = height;
  cam.validate();
  return cam;
}

void CameraModel::validate() const {
  if (!projection.allFinite()) {
    throw InvalidArgument("CameraModel: projection matrix has non-finite entries");
  }
  if (!(fx() > 0.0) || !(fy() > 0.0)) {
    throw InvalidArgument("CameraModel: focal entries P[0][0] and P[1][1] must be positive");
  }
  if (width <= 0 || height <= 0 || pad_right < 0 || pad_bottom < 0) {
    throw InvalidArgument("CameraModel: invalid image dimensions");
  }
  if (std::abs(projection.leftCols<3>().determinant()) < 1e-12) {
    throw InvalidArgument("CameraModel: singular projection matrix");
  }
}

Eigen::Vector3d CameraModel::projection_center() const {
  const Eigen::Matrix3d m = projection.leftCols<3>();
  return -(m.inverse() * projection.col(3));
}

Eigen::Vector3d CameraModel::back_project(double u, double v, double depth) const {
  // X = w * M^-1 [u v 1] - M^-1 p4, with w fixed by X.z == depth.
  const Eigen::Matrix3d m_inv = projection.leftCols<3>().inverse();
  const Eigen::Vector3d ray = m_inv * Eigen::Vector3d(u, v, 1.0);
  const Eigen::Vector3d shift = m_inv * projection.col(3);
  const double w = (depth + shift.z()) / ray.z();
  return w * ray - shift;
}

}  // namespace maploc
