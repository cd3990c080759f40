#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace maploc {

/// Hamilton quaternion, scalar first: q = a + b*i + c*j + d*k.
/// For a unit quaternion describing a rotation by theta, a = cos(theta / 2).
struct Quat {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  static Quat identity() { return {}; }

  double norm() const;
  /// Throws InvalidArgument for a (near) zero quaternion.
  Quat normalized() const;
  Eigen::Vector3d vec() const { return {b, c, d}; }
  Eigen::Vector4d coeffs() const { return {a, b, c, d}; }

  Quat operator-() const { return {-a, -b, -c, -d}; }
  bool operator==(const Quat&) const = default;
};

/// Deviation from unit norm tolerated by operations that require unit input.
inline constexpr double kUnitTolerance = 1e-6;

Quat quat_mul(const Quat& q1, const Quat& q2);

/// Inverse of a unit quaternion (its conjugate). Rejects non-unit input.
Quat quat_inv(const Quat& q);

/// Angular distance between two rotations: atan2(|vec(m)|, |a_m|) with
/// m = q * inv(normalize(q_tilde)). Lies in [0, pi/2] and equals half of the
/// geodesic rotation angle; q and -q are at distance zero.
double angular_distance(const Quat& q, const Quat& q_tilde);

/// Full rotation angle in [0, pi] represented by a unit quaternion.
double rotation_angle(const Quat& q);

Eigen::Matrix3d quat_to_matrix(const Quat& q);

/// Inverse of quat_to_matrix. The result has a >= 0. Rejects matrices that are
/// not orthonormal with det = +1 within 1e-6.
Quat matrix_to_quat(const Eigen::Matrix3d& rotation);

Quat quat_from_axis_angle(const Eigen::Vector3d& axis, double angle);

/// Intrinsic Z-Y-X Euler angles: R = Rz(z) * Ry(y) * Rx(x).
Quat quat_from_euler_zyx(double z, double y, double x);
/// Returns (z, y, x) with y in [-pi/2, pi/2].
Eigen::Vector3d euler_zyx_from_matrix(const Eigen::Matrix3d& rotation);

/// Rigid transform. Throughout the library a camera pose maps map-frame
/// points into the camera frame (x right, y down, z along the optical axis).
class PoseSE3 {
public:
  PoseSE3() = default;
  /// `rotation` must be unit within kUnitTolerance; it is renormalized.
  PoseSE3(const Quat& rotation, const Eigen::Vector3d& translation);

  static PoseSE3 identity() { return {}; }
  static PoseSE3 from_translation(const Eigen::Vector3d& t) { return {Quat::identity(), t}; }
  /// Rejects a bottom row other than (0 0 0 1) or a non-rotation block.
  static PoseSE3 from_matrix(const Eigen::Matrix4d& h);
  static PoseSE3 from_matrix3x4(const Eigen::Matrix<double, 3, 4>& rt);

  const Quat& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix3d rotation_matrix() const { return quat_to_matrix(rotation_); }
  Eigen::Matrix4d matrix() const;
  Eigen::Matrix<double, 3, 4> matrix3x4() const;

private:
  Quat rotation_;
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// h1 after h2 (matrix product H1 * H2).
PoseSE3 pose_compose(const PoseSE3& h1, const PoseSE3& h2);
PoseSE3 pose_inverse(const PoseSE3& h);
Eigen::Vector3d apply(const PoseSE3& h, const Eigen::Vector3d& p);

/// Camera-frame point of a map point, computed with a fixed scalar evaluation
/// order. Projection uses the same routine so depths can be compared bit for bit.
inline Eigen::Vector3d transform_point(const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                                       double x, double y, double z) {
  return {r(0, 0) * x + r(0, 1) * y + r(0, 2) * z + t.x(),
          r(1, 0) * x + r(1, 1) * y + r(1, 2) * z + t.y(),
          r(2, 0) * x + r(2, 1) * y + r(2, 2) * z + t.z()};
}

/// Per-axis bounds of the initial-pose perturbation.
struct NoiseSpec {
  double max_translation = 0.0;  ///< meters, per axis
  double max_rotation = 0.0;     ///< radians, per Euler angle

  void validate() const;
};

/// A perturbation expressed in a camera's own frame: the camera centre moves by
/// `center_offset` (camera axes) and the camera turns by the intrinsic Z-Y-X
/// angles (roll about z, yaw about y, pitch about x). The returned transform E
/// is applied on the camera side, i.e. perturbed = pose_compose(E, pose).
PoseSE3 local_perturbation(const Eigen::Vector3d& center_offset, double roll, double yaw,
                           double pitch);

/// Draws every translation axis from U[-max_t, max_t] and every Euler angle
/// from U[-max_r, max_r]; deterministic for a given seed.
PoseSE3 sample_init_pose(const PoseSE3& h_gt, const NoiseSpec& spec, std::uint64_t seed);

enum ErrorAxis : std::size_t { kLongitudinal = 0, kLateral, kVertical, kRoll, kPitch, kYaw };

/// Error of an estimate relative to ground truth. Translation components are
/// the estimated camera centre expressed in the ground-truth camera frame
/// (longitudinal = z, lateral = x, vertical = y); rotation components are the
/// Z-Y-X decomposition of R_est * R_gt^T (roll about z, yaw about y, pitch about x).
struct PoseError {
  std::array<double, 6> components{};
  double total_angle = 0.0;  ///< 2 * angular_distance, radians

  double translation_norm() const;
};

PoseError pose_error(const PoseSE3& h_gt, const PoseSE3& h_est);

/// KITTI poses convention: 12 numbers, row-major [R|T].
std::string format_pose(const PoseSE3& h);
/// Strict parse: exactly 12 numbers and a rotation block within 1e-6.
PoseSE3 parse_pose(std::string_view line);

}  // namespace maploc
