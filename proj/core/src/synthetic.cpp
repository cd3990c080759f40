#include "maploc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "maploc/random.hpp"

namespace maploc::synthetic {

namespace {

constexpr double kGround = 0.0;
constexpr double kCameraHeight = 1.65;

void add(PointCloudMap& cloud, double x, double y, double z, double intensity) {
  cloud.push_back(Eigen::Vector3f(static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)),
                  static_cast<float>(std::clamp(intensity, 0.0, 1.0)));
}

/// Axis-aligned rectangle sampled on a jittered grid. `axis` is the constant axis.
void add_rect(PointCloudMap& cloud, Rng& rng, int axis, double fixed, double a0, double a1,
              double b0, double b1, double step, double intensity) {
  for (double a = a0; a <= a1 + 1e-9; a += step) {
    for (double b = b0; b <= b1 + 1e-9; b += step) {
      const double ja = a + rng.symmetric(0.2 * step);
      const double jb = b + rng.symmetric(0.2 * step);
      const double i = intensity + rng.symmetric(0.05);
      switch (axis) {
        case 0: add(cloud, fixed, ja, jb, i); break;
        case 1: add(cloud, ja, fixed, jb, i); break;
        default: add(cloud, ja, jb, fixed, i); break;
      }
    }
  }
}

void add_box(PointCloudMap& cloud, Rng& rng, const Eigen::Vector3d& lo, const Eigen::Vector3d& hi,
             double step, double intensity) {
  add_rect(cloud, rng, 0, lo.x(), lo.y(), hi.y(), lo.z(), hi.z(), step, intensity);
  add_rect(cloud, rng, 0, hi.x(), lo.y(), hi.y(), lo.z(), hi.z(), step, intensity);
  add_rect(cloud, rng, 1, lo.y(), lo.x(), hi.x(), lo.z(), hi.z(), step, intensity);
  add_rect(cloud, rng, 1, hi.y(), lo.x(), hi.x(), lo.z(), hi.z(), step, intensity);
  add_rect(cloud, rng, 2, hi.z(), lo.x(), hi.x(), lo.y(), hi.y(), step, intensity);
}

void add_pole(PointCloudMap& cloud, Rng& rng, double x, double y, double height) {
  constexpr double kRadius = 0.15;
  for (double z = kGround; z <= height; z += 0.15) {
    for (int k = 0; k < 8; ++k) {
      const double a = 2.0 * std::numbers::pi * k / 8.0 + rng.symmetric(0.1);
      add(cloud, x + kRadius * std::cos(a), y + kRadius * std::sin(a), z, 0.9 + rng.symmetric(0.05));
    }
  }
  // lamp arm towards the street
  const double dir = y > 0 ? -1.0 : 1.0;
  for (double s = 0.0; s <= 1.5; s += 0.1) {
    add(cloud, x, y + dir * s, height, 0.95);
  }
}

void add_tree(PointCloudMap& cloud, Rng& rng, double x, double y) {
  add_pole(cloud, rng, x, y, 2.5);
  const double radius = 1.5 + rng.uniform(0.0, 0.8);
  const Eigen::Vector3d c(x, y, 2.5 + radius);
  for (int k = 0; k < 900; ++k) {
    Eigen::Vector3d d(rng.symmetric(1.0), rng.symmetric(1.0), rng.symmetric(1.0));
    if (d.norm() > 1.0 || d.norm() < 1e-3) continue;
    d = d.normalized() * radius * std::cbrt(rng.uniform(0.6, 1.0));
    add(cloud, c.x() + d.x(), c.y() + d.y(), c.z() + d.z(), 0.3 + rng.symmetric(0.1));
  }
}

}  // namespace

PointCloudMap street_scene(std::uint64_t seed) {
  Rng rng(seed);
  PointCloudMap cloud;
  cloud.reserve(60000, true);

  // road and sidewalks
  add_rect(cloud, rng, 2, kGround, -10.0, 70.0, -9.0, 9.0, 0.3, 0.2);

  // facades: segments with varying setback and height on both sides
  for (const double side : {1.0, -1.0}) {
    double x = -10.0;
    while (x < 70.0) {
      const double length = rng.uniform(7.0, 14.0);
      const double x1 = std::min(70.0, x + length);
      const double setback = rng.uniform(7.0, 9.0);
      const double height = rng.uniform(4.0, 9.0);
      add_rect(cloud, rng, 1, side * setback, x, x1, kGround, height, 0.3, 0.5 + rng.symmetric(0.1));
      // side face joining the next segment
      add_rect(cloud, rng, 0, x1, std::min(side * setback, side * 9.0), std::max(side * setback, side * 9.0),
               kGround, height, 0.3, 0.45);
      x = x1;
    }
  }

  // end wall
  add_rect(cloud, rng, 0, 70.0, -9.0, 9.0, kGround, 8.0, 0.3, 0.6);

  // poles at irregular spacing
  for (const double side : {1.0, -1.0}) {
    double x = rng.uniform(-5.0, 0.0);
    while (x < 65.0) {
      add_pole(cloud, rng, x, side * rng.uniform(5.2, 6.0), rng.uniform(4.0, 6.0));
      x += rng.uniform(6.0, 12.0);
    }
  }

  // parked boxes
  for (const double side : {1.0, -1.0}) {
    double x = rng.uniform(0.0, 6.0);
    while (x < 60.0) {
      const double y0 = side * rng.uniform(3.3, 3.8);
      const Eigen::Vector3d lo(x, std::min(y0, y0 + side * 1.8), kGround);
      const Eigen::Vector3d hi(x + rng.uniform(3.8, 4.6), std::max(y0, y0 + side * 1.8),
                               rng.uniform(1.4, 1.7));
      add_box(cloud, rng, lo, hi, 0.2, 0.7);
      x = hi.x() + rng.uniform(3.0, 14.0);
    }
  }

  for (int k = 0; k < 6; ++k) {
    const double side = k % 2 == 0 ? 1.0 : -1.0;
    add_tree(cloud, rng, 5.0 + 10.0 * k + rng.uniform(0.0, 4.0), side * rng.uniform(6.2, 6.8));
  }
  return cloud;
}

CameraModel street_camera() { return CameraModel::pinhole(160.0, 160.0, 160.0, 56.0, 320, 112); }

PoseSE3 camera_pose(const Eigen::Vector3d& center, double yaw) {
  Eigen::Matrix3d base;  // camera axes expressed in the map frame, yaw = 0
  base << 0, 0, 1,
         -1, 0, 0,
          0, -1, 0;
  const Eigen::Matrix3d map_from_cam =
      Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix() * base;
  const Eigen::Matrix3d r = map_from_cam.transpose();
  return {matrix_to_quat(r), -(r * center)};
}

std::vector<PoseSE3> street_trajectory(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PoseSE3> poses;
  for (int k = 0; k < count; ++k) {
    const double x = count > 1 ? 2.0 + 36.0 * k / (count - 1) : 10.0;
    const double y = rng.symmetric(1.0);
    const double yaw = rng.symmetric(3.0 * std::numbers::pi / 180.0);
    poses.push_back(camera_pose({x, y, kGround + kCameraHeight}, yaw));
  }
  return poses;
}

RgbImage camera_image(const PointCloudMap& scene, const PoseSE3& pose, const CameraModel& cam) {
  RgbImage img(cam.width, cam.height);
  std::vector<float> zbuf(static_cast<std::size_t>(cam.width) * cam.height,
                          std::numeric_limits<float>::infinity());
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      std::uint8_t* p = img.px(u, v);
      p[0] = 150; p[1] = 180; p[2] = 220;  // sky
    }
  }
  const Eigen::Matrix3d r = pose.rotation_matrix();
  const Eigen::Vector3d& t = pose.translation();
  const auto& pm = cam.projection;
  for (std::size_t k = 0; k < scene.size(); ++k) {
    const Eigen::Vector3f& pt = scene.points[k];
    const Eigen::Vector3d c = transform_point(r, t, pt.x(), pt.y(), pt.z());
    if (c.z() <= 0.05) continue;
    const Eigen::Vector3d h = pm.leftCols<3>() * c + pm.col(3);
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    // splat 2x2 so the stand-in image has no holes at mid range
    for (int dv = 0; dv <= 1; ++dv) {
      for (int du = 0; du <= 1; ++du) {
        const int ui = static_cast<int>(std::floor(u)) + du;
        const int vi = static_cast<int>(std::floor(v)) + dv;
        if (ui < 0 || vi < 0 || ui >= cam.width || vi >= cam.height) continue;
        float& z = zbuf[static_cast<std::size_t>(vi) * cam.width + ui];
        if (static_cast<float>(c.z()) >= z) continue;
        z = static_cast<float>(c.z());
        const double i = scene.has_intensity() ? scene.intensity[k] : 0.5;
        const double shade = 1.0 / (1.0 + 0.02 * c.z());
        std::uint8_t* p = img.px(ui, vi);
        p[0] = static_cast<std::uint8_t>(std::clamp(255.0 * i * shade, 0.0, 255.0));
        p[1] = static_cast<std::uint8_t>(std::clamp(255.0 * (0.3 + 0.6 * i) * shade, 0.0, 255.0));
        p[2] = static_cast<std::uint8_t>(std::clamp(255.0 * (1.0 - i) * shade, 0.0, 255.0));
      }
    }
  }
  return img;
}

WallFenceFixture wall_fence() {
  WallFenceFixture f;
  f.pose = PoseSE3::identity();
  f.camera = CameraModel::pinhole(160.0, 160.0, 160.0, 56.0, 320, 112);
  // wall: 0.1 m spacing at 10 m, i.e. a point every 1.6 px, leaving gaps
  for (double x = -f.wall_half_width; x <= f.wall_half_width + 1e-9; x += 0.1) {
    for (double y = -f.wall_half_height; y <= f.wall_half_height + 1e-9; y += 0.1) {
      add(f.cloud, x, y, f.wall_depth, 0.5);
    }
  }
  // fence: wider than the wall, 0.07 m spacing at 14 m (0.8 px)
  for (double x = -6.0; x <= 6.0 + 1e-9; x += 0.07) {
    for (double y = -1.5; y <= 1.5 + 1e-9; y += 0.07) {
      add(f.cloud, x, y, f.fence_depth, 0.8);
    }
  }
  return f;
}

}  // namespace maploc::synthetic
