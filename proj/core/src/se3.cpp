#include "maploc/se3.hpp"

#include <charconv>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "maploc/error.hpp"
#include "maploc/random.hpp"
#include "text_util.hpp"

namespace maploc {

double Quat::norm() const { return std::sqrt(a * a + b * b + c * c + d * d); }

Quat Quat::normalized() const {
  const double n = norm();
  if (!(n > 1e-12) || !std::isfinite(n)) {
    throw InvalidArgument("cannot normalize a zero or non-finite quaternion");
  }
  return {a / n, b / n, c / n, d / n};
}

namespace {

void require_unit(const Quat& q, const char* what) {
  const double n = q.norm();
  if (!(std::abs(n - 1.0) <= kUnitTolerance)) {
    throw InvalidArgument(std::string(what) + ": quaternion is not unit-norm (norm " +
                          std::to_string(n) + ")");
  }
}

void require_rotation(const Eigen::Matrix3d& r, double tol, const char* what) {
  if (!r.allFinite()) {
    throw InvalidArgument(std::string(what) + ": non-finite rotation matrix");
  }
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = r.determinant();
  if (ortho > tol || std::abs(det - 1.0) > tol) {
    throw InvalidArgument(std::string(what) + ": matrix is not a rotation (orthogonality error " +
                          std::to_string(ortho) + ", det " + std::to_string(det) + ")");
  }
}

}  // namespace

Quat quat_mul(const Quat& p, const Quat& q) {
  return {p.a * q.a - p.b * q.b - p.c * q.c - p.d * q.d,
          p.a * q.b + p.b * q.a + p.c * q.d - p.d * q.c,
          p.a * q.c - p.b * q.d + p.c * q.a + p.d * q.b,
          p.a * q.d + p.b * q.c - p.c * q.b + p.d * q.a};
}

Quat quat_inv(const Quat& q) {
  require_unit(q, "quat_inv");
  return {q.a, -q.b, -q.c, -q.d};
}

double angular_distance(const Quat& q, const Quat& q_tilde) {
  require_unit(q, "angular_distance");
  require_unit(q_tilde, "angular_distance");
  const Quat m = quat_mul(q, quat_inv(q_tilde.normalized()));
  return std::atan2(std::sqrt(m.b * m.b + m.c * m.c + m.d * m.d), std::abs(m.a));
}

double rotation_angle(const Quat& q) { return 2.0 * angular_distance(Quat::identity(), q); }

Eigen::Matrix3d quat_to_matrix(const Quat& q) {
  const double a = q.a, b = q.b, c = q.c, d = q.d;
  Eigen::Matrix3d r;
  r << 1 - 2 * (c * c + d * d), 2 * (b * c - a * d), 2 * (b * d + a * c),
      2 * (b * c + a * d), 1 - 2 * (b * b + d * d), 2 * (c * d - a * b),
      2 * (b * d - a * c), 2 * (c * d + a * b), 1 - 2 * (b * b + c * c);
  return r;
}

Quat matrix_to_quat(const Eigen::Matrix3d& r) {
  require_rotation(r, 1e-6, "matrix_to_quat");
  // Shepperd: pivot on the largest of (trace, diagonal) for stability.
  const double tr = r.trace();
  Quat q;
  if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    q = {0.25 * s, (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s};
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2));
    q = {(r(2, 1) - r(1, 2)) / s, 0.25 * s, (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s};
  } else if (r(1, 1) >= r(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2));
    q = {(r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, 0.25 * s, (r(1, 2) + r(2, 1)) / s};
  } else {
    const double s = 2.0 * std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1));
    q = {(r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, 0.25 * s};
  }
  if (q.a < 0.0) {
    q = -q;
  }
  return q.normalized();
}

Quat quat_from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0)) {
    throw InvalidArgument("quat_from_axis_angle: zero axis");
  }
  const Eigen::Vector3d u = axis / n;
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * u.x(), s * u.y(), s * u.z()};
}

Quat quat_from_euler_zyx(double z, double y, double x) {
  const Quat qz{std::cos(0.5 * z), 0.0, 0.0, std::sin(0.5 * z)};
  const Quat qy{std::cos(0.5 * y), 0.0, std::sin(0.5 * y), 0.0};
  const Quat qx{std::cos(0.5 * x), std::sin(0.5 * x), 0.0, 0.0};
  return quat_mul(quat_mul(qz, qy), qx);
}

Eigen::Vector3d euler_zyx_from_matrix(const Eigen::Matrix3d& r) {
  const double y = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  const double z = std::atan2(r(1, 0), r(0, 0));
  const double x = std::atan2(r(2, 1), r(2, 2));
  return {z, y, x};
}

PoseSE3::PoseSE3(const Quat& rotation, const Eigen::Vector3d& translation)
    : translation_(translation) {
  require_unit(rotation, "PoseSE3");
  // Leave already-normalized input bit-identical.
  rotation_ = std::abs(rotation.norm() - 1.0) > 1e-15 ? rotation.normalized() : rotation;
}

PoseSE3 PoseSE3::from_matrix(const Eigen::Matrix4d& h) {
  if (!h.allFinite()) {
    throw InvalidArgument("PoseSE3::from_matrix: non-finite entries");
  }
  if (std::abs(h(3, 0)) > 1e-9 || std::abs(h(3, 1)) > 1e-9 || std::abs(h(3, 2)) > 1e-9 ||
      std::abs(h(3, 3) - 1.0) > 1e-9) {
    throw InvalidArgument("PoseSE3::from_matrix: bottom row must be (0 0 0 1)");
  }
  return from_matrix3x4(h.topRows<3>());
}

PoseSE3 PoseSE3::from_matrix3x4(const Eigen::Matrix<double, 3, 4>& rt) {
  const Eigen::Matrix3d r = rt.leftCols<3>();
  return {matrix_to_quat(r), rt.col(3)};
}

Eigen::Matrix4d PoseSE3::matrix() const {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topRows<3>() = matrix3x4();
  return h;
}

Eigen::Matrix<double, 3, 4> PoseSE3::matrix3x4() const {
  Eigen::Matrix<double, 3, 4> rt;
  rt.leftCols<3>() = rotation_matrix();
  rt.col(3) = translation_;
  return rt;
}

PoseSE3 pose_compose(const PoseSE3& h1, const PoseSE3& h2) {
  const Eigen::Matrix3d r1 = h1.rotation_matrix();
  const Eigen::Vector3d& t2 = h2.translation();
  return {quat_mul(h1.rotation(), h2.rotation()),
          transform_point(r1, h1.translation(), t2.x(), t2.y(), t2.z())};
}

PoseSE3 pose_inverse(const PoseSE3& h) {
  const Quat qi = quat_inv(h.rotation());
  return {qi, -(quat_to_matrix(qi) * h.translation())};
}

Eigen::Vector3d apply(const PoseSE3& h, const Eigen::Vector3d& p) {
  return transform_point(h.rotation_matrix(), h.translation(), p.x(), p.y(), p.z());
}

void NoiseSpec::validate() const {
  if (!(max_translation >= 0.0) || !(max_rotation >= 0.0) || !std::isfinite(max_translation) ||
      !std::isfinite(max_rotation)) {
    throw InvalidArgument("NoiseSpec: bounds must be finite and non-negative");
  }
}

PoseSE3 local_perturbation(const Eigen::Vector3d& center_offset, double roll, double yaw,
                           double pitch) {
  const Quat q = quat_from_euler_zyx(roll, yaw, pitch);
  return {q, -(quat_to_matrix(q) * center_offset)};
}

PoseSE3 sample_init_pose(const PoseSE3& h_gt, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Eigen::Vector3d offset;
  for (int i = 0; i < 3; ++i) {
    offset[i] = rng.symmetric(spec.max_translation);
  }
  const double roll = rng.symmetric(spec.max_rotation);
  const double yaw = rng.symmetric(spec.max_rotation);
  const double pitch = rng.symmetric(spec.max_rotation);
  return pose_compose(local_perturbation(offset, roll, yaw, pitch), h_gt);
}

double PoseError::translation_norm() const {
  return std::sqrt(components[kLongitudinal] * components[kLongitudinal] +
                   components[kLateral] * components[kLateral] +
                   components[kVertical] * components[kVertical]);
}

PoseError pose_error(const PoseSE3& h_gt, const PoseSE3& h_est) {
  const Eigen::Matrix3d r_est = h_est.rotation_matrix();
  const Eigen::Vector3d center_est = -(r_est.transpose() * h_est.translation());
  const Eigen::Vector3d d = apply(h_gt, center_est);
  const Eigen::Matrix3d r_rel = r_est * h_gt.rotation_matrix().transpose();
  const Eigen::Vector3d zyx = euler_zyx_from_matrix(r_rel);

  PoseError e;
  e.components[kLongitudinal] = d.z();
  e.components[kLateral] = d.x();
  e.components[kVertical] = d.y();
  e.components[kRoll] = zyx[0];
  e.components[kYaw] = zyx[1];
  e.components[kPitch] = zyx[2];
  e.total_angle = 2.0 * angular_distance(h_gt.rotation(), h_est.rotation());
  return e;
}

std::string format_pose(const PoseSE3& h) {
  const Eigen::Matrix<double, 3, 4> rt = h.matrix3x4();
  std::string out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!out.empty()) {
        out += ' ';
      }
      out += detail::format_double(rt(r, c));
    }
  }
  return out;
}

PoseSE3 parse_pose(std::string_view line) {
  const std::vector<double> v = detail::parse_doubles(line, 1);
  if (v.size() != 12) {
    throw FormatError("pose needs 12 numbers, got " + std::to_string(v.size()), 1);
  }
  Eigen::Matrix<double, 3, 4> rt;
  for (int i = 0; i < 12; ++i) {
    rt(i / 4, i % 4) = v[static_cast<std::size_t>(i)];
  }
  return PoseSE3::from_matrix3x4(rt);
}

}  // namespace maploc
