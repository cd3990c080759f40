#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Geometry>

#include "maploc/se3.hpp"

namespace maploc::test {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kDeg = kPi / 180.0;

/// Uniform rotation drawn through Eigen, independent of the library's samplers.
inline Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector4d v(n(rng), n(rng), n(rng), n(rng));
  v.normalize();
  return {v[0], v[1], v[2], v[3]};
}

inline Eigen::Vector3d random_vec(std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  return {u(rng), u(rng), u(rng)};
}

inline PoseSE3 random_pose(std::mt19937_64& rng, double half = 10.0) {
  return {random_quat(rng), random_vec(rng, half)};
}

inline Eigen::Matrix3d eigen_matrix(const Quat& q) {
  return Eigen::Quaterniond(q.a, q.b, q.c, q.d).normalized().toRotationMatrix();
}

inline Eigen::Matrix4d homogeneous(const PoseSE3& h) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = eigen_matrix(h.rotation());
  m.topRightCorner<3, 1>() = h.translation();
  return m;
}

/// Angle of a rotation matrix from its trace.
inline double trace_angle(const Eigen::Matrix3d& r) {
  return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

inline bool same_rotation(const Quat& p, const Quat& q, double tol) {
  const double dot = p.a * q.a + p.b * q.b + p.c * q.c + p.d * q.d;
  return std::abs(std::abs(dot) - 1.0) < tol;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("maploc_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace maploc::test
