#include "maploc/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "maploc/error.hpp"
#include "parallel.hpp"

namespace maploc {

double angle_from_threshold(double threshold) {
  return std::numbers::pi / 2.0 - std::atan(threshold);
}

OcclusionParams OcclusionParams::from_threshold(int window, double threshold) {
  OcclusionParams p;
  p.window = window;
  p.threshold = threshold;
  p.angle_min = angle_from_threshold(threshold);
  p.validate();
  return p;
}

void OcclusionParams::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw InvalidArgument("OcclusionParams: window must be odd and >= 3");
  }
  if (!(angle_min > 0.0 && angle_min < std::numbers::pi / 2.0)) {
    throw InvalidArgument("OcclusionParams: angle_min must lie in (0, pi/2)");
  }
}

namespace {

/// Back-projection with a fixed evaluation order shared by both code paths.
struct BackProjector {
  Eigen::Matrix3d m_inv;
  Eigen::Vector3d shift;
  Eigen::Vector3d pinhole;

  explicit BackProjector(const CameraModel& cam)
      : m_inv(cam.projection.leftCols<3>().inverse()),
        shift(m_inv * cam.projection.col(3)),
        pinhole(-shift) {}

  Eigen::Vector3d operator()(int u, int v, float depth) const {
    const double ray_x = m_inv(0, 0) * u + m_inv(0, 1) * v + m_inv(0, 2);
    const double ray_y = m_inv(1, 0) * u + m_inv(1, 1) * v + m_inv(1, 2);
    const double ray_z = m_inv(2, 0) * u + m_inv(2, 1) * v + m_inv(2, 2);
    const double w = (static_cast<double>(depth) + shift.z()) / ray_z;
    return {w * ray_x - shift.x(), w * ray_y - shift.y(), w * ray_z - shift.z()};
  }
};

Eigen::Vector3d unit(const Eigen::Vector3d& v) {
  const double n = std::sqrt(v.x() * v.x() + v.y() * v.y() + v.z() * v.z());
  return {v.x() / n, v.y() / n, v.z() / n};
}

double dot(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return a.x() * b.x() + a.y() * b.y() + a.z() * b.z();
}

double cone_angle(const Eigen::Vector3d& to_pinhole, const Eigen::Vector3d& pj,
                  const Eigen::Vector3d& pi) {
  return std::acos(std::clamp(dot(to_pinhole, unit(pi - pj)), -1.0, 1.0));
}

}  // namespace

VisibilityMask brute_force_visibility(const DepthImage& img, const OcclusionParams& params) {
  params.validate();
  const BackProjector back(img.camera);
  const int half = params.window / 2;
  VisibilityMask mask{img.width, img.height,
                      std::vector<std::uint8_t>(static_cast<std::size_t>(img.width) * img.height, 0)};
  for (int vj = 0; vj < img.height; ++vj) {
    for (int uj = 0; uj < img.width; ++uj) {
      const float dj = img.at(uj, vj);
      if (dj == 0.0f) {
        continue;
      }
      const Eigen::Vector3d pj = back(uj, vj, dj);
      const Eigen::Vector3d view = unit(back.pinhole - pj);
      double min_angle = std::numeric_limits<double>::infinity();
      for (int vi = vj - half; vi <= vj + half; ++vi) {
        for (int ui = uj - half; ui <= uj + half; ++ui) {
          if (!img.in_bounds(ui, vi) || (ui == uj && vi == vj)) continue;
          const float di = img.at(ui, vi);
          if (di == 0.0f || !(di < dj)) continue;
          min_angle = std::min(min_angle, cone_angle(view, pj, back(ui, vi, di)));
        }
      }
      mask.visible[static_cast<std::size_t>(vj) * img.width + uj] = min_angle < params.angle_min ? 0 : 1;
    }
  }
  return mask;
}

DepthImage occlusion_filter(const DepthImage& img, const OcclusionParams& params, int workers) {
  params.validate();
  const BackProjector back(img.camera);
  const int half = params.window / 2;
  const std::size_t n = img.depth.size();

  std::vector<Eigen::Vector3d> points(n);
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const float d = img.at(u, v);
      if (d != 0.0f) points[static_cast<std::size_t>(v) * img.width + u] = back(u, v, d);
    }
  }
  // acos(x) >= angle_min + margin whenever x <= cos_reject, so such neighbours
  // can be skipped without changing any decision.
  const double cos_reject = std::cos(params.angle_min) - 1e-9;

  DepthImage out = img;
  detail::parallel_chunks(static_cast<std::size_t>(img.height), workers,
                          [&](std::size_t row_begin, std::size_t row_end, int) {
    for (int vj = static_cast<int>(row_begin); vj < static_cast<int>(row_end); ++vj) {
      for (int uj = 0; uj < img.width; ++uj) {
        const float dj = img.at(uj, vj);
        if (dj == 0.0f) continue;
        const Eigen::Vector3d& pj = points[static_cast<std::size_t>(vj) * img.width + uj];
        const Eigen::Vector3d view = unit(back.pinhole - pj);
        bool occluded = false;
        const int v0 = std::max(0, vj - half), v1 = std::min(img.height - 1, vj + half);
        const int u0 = std::max(0, uj - half), u1 = std::min(img.width - 1, uj + half);
        for (int vi = v0; vi <= v1 && !occluded; ++vi) {
          for (int ui = u0; ui <= u1; ++ui) {
            const float di = img.at(ui, vi);
            if (di == 0.0f || !(di < dj)) continue;
            const Eigen::Vector3d& pi = points[static_cast<std::size_t>(vi) * img.width + ui];
            const Eigen::Vector3d c = unit(pi - pj);
            if (dot(view, c) <= cos_reject) continue;
            if (cone_angle(view, pj, pi) < params.angle_min) {
              occluded = true;
              break;
            }
          }
        }
        if (occluded) out.at(uj, vj) = 0.0f;
      }
    }
  });
  return out;
}

VisibilityMask nonzero_mask(const DepthImage& img) {
  VisibilityMask mask{img.width, img.height, std::vector<std::uint8_t>(img.depth.size(), 0)};
  for (std::size_t i = 0; i < img.depth.size(); ++i) {
    mask.visible[i] = img.depth[i] != 0.0f ? 1 : 0;
  }
  return mask;
}

}  // namespace maploc
