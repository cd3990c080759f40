#include <gtest/gtest.h>

#include "maploc/error.hpp"
#include "maploc/occlusion.hpp"
#include "maploc/projection.hpp"
#include "maploc/synthetic.hpp"
#include "support.hpp"

namespace maploc {
namespace {

using test::kPi;

DepthImage random_scene(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(1, 128);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int w = size(rng), h = size(rng);
  DepthImage img(w, h);
  const double f = 50.0 + 400.0 * u01(rng);
  img.camera = CameraModel::pinhole(f, f * (0.9 + 0.2 * u01(rng)), w * u01(rng), h * u01(rng), w, h);
  const double density = 0.05 + 0.9 * u01(rng);
  // a few depth layers make occluders common
  const double near = 2.0 + 10.0 * u01(rng);
  for (auto& d : img.depth) {
    if (u01(rng) > density) continue;
    d = static_cast<float>(u01(rng) < 0.5 ? near + u01(rng) : near * (2.0 + 3.0 * u01(rng)));
  }
  return img;
}

/// Direct evaluation of the cone rule for a zero-offset pinhole camera.
VisibilityMask cone_rule(const DepthImage& img, double angle_min, int window) {
  const Eigen::Matrix3d k_inv = img.camera.projection.leftCols<3>().inverse();
  const auto point = [&](int u, int v) { return Eigen::Vector3d(k_inv * Eigen::Vector3d(u, v, 1.0) * img.at(u, v)); };
  VisibilityMask mask{img.width, img.height, std::vector<std::uint8_t>(img.depth.size(), 0)};
  const int half = window / 2;
  for (int v = 0; v < img.height; ++v)
    for (int u = 0; u < img.width; ++u) {
      if (img.at(u, v) == 0.0f) continue;
      const Eigen::Vector3d pj = point(u, v);
      const Eigen::Vector3d view = (-pj).normalized();
      bool visible = true;
      for (int b = -half; b <= half; ++b)
        for (int a = -half; a <= half; ++a) {
          if ((a == 0 && b == 0) || !img.in_bounds(u + a, v + b)) continue;
          const float di = img.at(u + a, v + b);
          if (di == 0.0f || !(di < img.at(u, v))) continue;
          const double theta = std::acos(std::clamp(view.dot((point(u + a, v + b) - pj).normalized()), -1.0, 1.0));
          if (theta < angle_min) visible = false;
        }
      mask.visible[static_cast<std::size_t>(v) * img.width + u] = visible ? 1 : 0;
    }
  return mask;
}

TEST(Occlusion, AngleFromThreshold) {
  EXPECT_NEAR(angle_from_threshold(1.0), kPi / 4.0, 1e-15);
  EXPECT_NEAR(OcclusionParams::from_threshold(5, 3.0).angle_min, kPi / 2.0 - std::atan(3.0), 1e-15);
  EXPECT_THROW(OcclusionParams::from_threshold(4, 3.0).validate(), InvalidArgument);
}

TEST(Occlusion, SinglePixelKept) {
  DepthImage img(9, 9);
  img.camera = CameraModel::pinhole(10, 10, 4, 4, 9, 9);
  img.at(4, 4) = 5.0f;
  const auto params = OcclusionParams::from_threshold(5, 3.0);
  EXPECT_EQ(occlusion_filter(img, params).depth, img.depth);
}

TEST(Occlusion, EqualDepthNeighboursBothKept) {
  DepthImage img(9, 9);
  img.camera = CameraModel::pinhole(10, 10, 4, 4, 9, 9);
  img.at(4, 4) = 5.0f;
  img.at(5, 4) = 5.0f;
  EXPECT_EQ(occlusion_filter(img, OcclusionParams::from_threshold(5, 3.0)).nonzero_count(), 2u);
}

TEST(Occlusion, PointBehindNearPlaneRemoved) {
  DepthImage img(21, 21);
  img.camera = CameraModel::pinhole(100, 100, 10, 10, 21, 21);
  for (int v = 0; v < 21; ++v)
    for (int u = 0; u < 21; ++u) img.at(u, v) = 5.0f;
  img.at(10, 10) = 20.0f;
  const auto params = OcclusionParams::from_threshold(5, 3.0);
  const DepthImage out = occlusion_filter(img, params);
  EXPECT_EQ(out.at(10, 10), 0.0f);
  EXPECT_EQ(out.nonzero_count(), 21u * 21u - 1u);
  EXPECT_EQ(nonzero_mask(out), cone_rule(img, params.angle_min, 5));
}

TEST(Occlusion, EmptyAndConstantImages) {
  DepthImage img(16, 16);
  img.camera = CameraModel::pinhole(20, 20, 8, 8, 16, 16);
  const auto params = OcclusionParams::from_threshold(5, 3.0);
  const VisibilityMask none = brute_force_visibility(img, params);
  EXPECT_TRUE(std::all_of(none.visible.begin(), none.visible.end(), [](auto b) { return b == 0; }));
  std::fill(img.depth.begin(), img.depth.end(), 7.0f);
  const VisibilityMask all = brute_force_visibility(img, params);
  EXPECT_TRUE(std::all_of(all.visible.begin(), all.visible.end(), [](auto b) { return b == 1; }));
}

TEST(Occlusion, FastPathEqualsBruteForce) {
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> th(0.3, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const DepthImage img = random_scene(rng);
    const int window = 3 + 2 * (trial % 3);
    const auto params = OcclusionParams::from_threshold(window, th(rng));
    const VisibilityMask brute = brute_force_visibility(img, params);
    EXPECT_EQ(nonzero_mask(occlusion_filter(img, params)), brute) << "trial " << trial;
    EXPECT_EQ(nonzero_mask(occlusion_filter(img, params, 4)), brute) << "trial " << trial;
  }
}

TEST(Occlusion, BruteForceMatchesConeRule) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    DepthImage img = random_scene(rng);
    img.camera.projection(1, 1) = img.camera.projection(0, 0);
    const auto params = OcclusionParams::from_threshold(5, 3.0);
    const VisibilityMask a = brute_force_visibility(img, params);
    const VisibilityMask b = cone_rule(img, params.angle_min, 5);
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.visible.size(); ++i) differ += a.visible[i] != b.visible[i];
    // only ties at the threshold may differ through rounding
    EXPECT_LE(differ, a.visible.size() / 1000) << "trial " << trial;
  }
}

TEST(Occlusion, MonotoneInAngle) {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    const DepthImage img = random_scene(rng);
    VisibilityMask prev = nonzero_mask(img);
    for (double th : {20.0, 8.0, 3.0, 1.0, 0.3, 0.05}) {
      const VisibilityMask m = brute_force_visibility(img, OcclusionParams::from_threshold(5, th));
      for (std::size_t i = 0; i < m.visible.size(); ++i) EXPECT_LE(m.visible[i], prev.visible[i]);
      prev = m;
    }
  }
}

TEST(Occlusion, WallHidesFence) {
  const auto fx = synthetic::wall_fence();
  const DepthImage raw = project(fx.cloud, fx.pose, fx.camera);
  const DepthImage out = occlusion_filter(raw, OcclusionParams::from_threshold(5, 3.0));
  const CameraModel& cam = fx.camera;
  const double f = cam.fx();
  // pixel box of the wall, shrunk by the window so edge effects are excluded
  const int u0 = static_cast<int>(cam.cx() - f * fx.wall_half_width / fx.wall_depth) + 3;
  const int u1 = static_cast<int>(cam.cx() + f * fx.wall_half_width / fx.wall_depth) - 3;
  const int v0 = static_cast<int>(cam.cy() - f * fx.wall_half_height / fx.wall_depth) + 3;
  const int v1 = static_cast<int>(cam.cy() + f * fx.wall_half_height / fx.wall_depth) - 3;
  std::size_t fence_inside_raw = 0, fence_inside_kept = 0, wall_raw = 0, wall_kept = 0;
  std::size_t fence_outside_raw = 0, fence_outside_kept = 0;
  for (int v = 0; v < raw.height; ++v)
    for (int u = 0; u < raw.width; ++u) {
      const float d = raw.at(u, v);
      if (d == 0.0f) continue;
      const bool inside = u >= u0 && u <= u1 && v >= v0 && v <= v1;
      const bool fence = d > 12.0f;
      const bool kept = out.at(u, v) != 0.0f;
      if (fence && inside) {
        ++fence_inside_raw;
        fence_inside_kept += kept;
      } else if (fence && (u < u0 - 10 || u > u1 + 10)) {
        ++fence_outside_raw;
        fence_outside_kept += kept;
      } else if (!fence) {
        ++wall_raw;
        wall_kept += kept;
      }
    }
  // the sparse wall lets the fence bleed through before filtering
  ASSERT_GT(fence_inside_raw, 500u);
  EXPECT_EQ(fence_inside_kept, 0u);
  EXPECT_EQ(wall_kept, wall_raw);
  EXPECT_EQ(fence_outside_kept, fence_outside_raw);
}

}  // namespace
}  // namespace maploc
