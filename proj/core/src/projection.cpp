#include "maploc/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maploc/error.hpp"
#include "maploc/random.hpp"
#include "parallel.hpp"

namespace maploc {

namespace {

constexpr float kEmpty = std::numeric_limits<float>::infinity();

void splat_range(const PointCloudMap& cloud, std::size_t begin, std::size_t end,
                 const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                 const Eigen::Matrix<double, 3, 4>& p, int width, int height, int stride,
                 double z_near, float* buffer) {
  const double w_lim = static_cast<double>(width) - 0.5;
  const double h_lim = static_cast<double>(height) - 0.5;
  for (std::size_t k = begin; k < end; ++k) {
    const Eigen::Vector3f& pt = cloud.points[k];
    const Eigen::Vector3d c = transform_point(r, t, pt.x(), pt.y(), pt.z());
    if (!(c.z() > z_near)) {
      continue;
    }
    const double xp = p(0, 0) * c.x() + p(0, 1) * c.y() + p(0, 2) * c.z() + p(0, 3);
    const double yp = p(1, 0) * c.x() + p(1, 1) * c.y() + p(1, 2) * c.z() + p(1, 3);
    const double wp = p(2, 0) * c.x() + p(2, 1) * c.y() + p(2, 2) * c.z() + p(2, 3);
    if (!(wp > 0.0)) {
      continue;
    }
    const double u = xp / wp;
    const double v = yp / wp;
    // round-half-up lands in [0, width) exactly when u in [-0.5, width - 0.5)
    if (!(u >= -0.5 && u < w_lim && v >= -0.5 && v < h_lim)) {
      continue;
    }
    const int ui = static_cast<int>(std::floor(u + 0.5));
    const int vi = static_cast<int>(std::floor(v + 0.5));
    float& cell = buffer[static_cast<std::size_t>(vi) * stride + ui];
    const float z = static_cast<float>(c.z());
    if (z < cell) {
      cell = z;
    }
  }
}

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

}  // namespace

DepthImage project(const PointCloudMap& cloud, const PoseSE3& h, const CameraModel& cam,
                   const ProjectionOptions& options) {
  cam.validate();
  DepthImage img(cam.padded_width(), cam.padded_height());
  img.generating_pose = h;
  img.camera = cam;

  const Eigen::Matrix3d r = h.rotation_matrix();
  const Eigen::Vector3d& t = h.translation();
  const std::size_t pixels = img.depth.size();

  const int workers = std::max(1, options.workers);
  std::vector<std::vector<float>> buffers(static_cast<std::size_t>(workers));
  detail::parallel_chunks(cloud.size(), workers, [&](std::size_t b, std::size_t e, int w) {
    auto& buf = buffers[static_cast<std::size_t>(w)];
    buf.assign(pixels, kEmpty);
    splat_range(cloud, b, e, r, t, cam.projection, cam.width, cam.height, img.width,
                options.z_near, buf.data());
  });

  for (std::size_t i = 0; i < pixels; ++i) {
    float best = kEmpty;
    for (const auto& buf : buffers) {
      if (!buf.empty() && buf[i] < best) {
        best = buf[i];
      }
    }
    img.depth[i] = best == kEmpty ? 0.0f : best;
  }
  return img;
}

DepthImage pad_image(const DepthImage& img, int multiple) {
  if (multiple <= 0) {
    throw InvalidArgument("pad_image: multiple must be positive");
  }
  const int w = round_up(img.width, multiple);
  const int hgt = round_up(img.height, multiple);
  DepthImage out(w, hgt);
  out.generating_pose = img.generating_pose;
  out.camera = img.camera;
  out.camera.pad_right += w - img.width;
  out.camera.pad_bottom += hgt - img.height;
  for (int v = 0; v < img.height; ++v) {
    std::copy_n(img.depth.begin() + static_cast<std::ptrdiff_t>(v) * img.width, img.width,
                out.depth.begin() + static_cast<std::ptrdiff_t>(v) * w);
  }
  return out;
}

RgbImage pad_rgb(const RgbImage& img, int multiple) {
  if (multiple <= 0) {
    throw InvalidArgument("pad_rgb: multiple must be positive");
  }
  RgbImage out(round_up(img.width, multiple), round_up(img.height, multiple));
  for (int v = 0; v < img.height; ++v) {
    std::copy_n(img.px(0, v), static_cast<std::size_t>(img.width) * 3, out.px(0, v));
  }
  return out;
}

AugmentDraw sample_augmentation(const AugmentParams& params, std::uint64_t seed) {
  Rng rng(seed);
  AugmentDraw d;
  d.brightness = rng.uniform(params.jitter_min, params.jitter_max);
  d.contrast = rng.uniform(params.jitter_min, params.jitter_max);
  d.saturation = rng.uniform(params.jitter_min, params.jitter_max);
  d.mirror = rng.bernoulli(params.mirror_probability);
  d.rotation = rng.symmetric(params.max_rotation);
  return d;
}

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

double gray(const std::uint8_t* p) { return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]; }

}  // namespace

RgbImage color_jitter(const RgbImage& rgb, double brightness, double contrast, double saturation) {
  RgbImage out = rgb;
  if (brightness != 1.0) {
    for (auto& c : out.data) c = to_u8(c * brightness);
  }
  if (contrast != 1.0 && !out.data.empty()) {
    double mean = 0.0;
    for (int v = 0; v < out.height; ++v)
      for (int u = 0; u < out.width; ++u) mean += gray(out.px(u, v));
    mean /= static_cast<double>(out.width) * out.height;
    for (auto& c : out.data) c = to_u8(contrast * c + (1.0 - contrast) * mean);
  }
  if (saturation != 1.0) {
    for (int v = 0; v < out.height; ++v) {
      for (int u = 0; u < out.width; ++u) {
        std::uint8_t* p = out.px(u, v);
        const double g = gray(p);
        for (int k = 0; k < 3; ++k) p[k] = to_u8(saturation * p[k] + (1.0 - saturation) * g);
      }
    }
  }
  return out;
}

RgbImage mirror_rgb(const RgbImage& rgb) {
  RgbImage out(rgb.width, rgb.height);
  for (int v = 0; v < rgb.height; ++v) {
    for (int u = 0; u < rgb.width; ++u) {
      std::copy_n(rgb.px(rgb.width - 1 - u, v), 3, out.px(u, v));
    }
  }
  return out;
}

RgbImage rotate_rgb(const RgbImage& rgb, double angle, double cx, double cy) {
  RgbImage out(rgb.width, rgb.height);
  // Displayed counter-clockwise by `angle` == rotation by -angle in (u, v) with v down;
  // sample the source at the inverse rotation.
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  for (int v = 0; v < rgb.height; ++v) {
    for (int u = 0; u < rgb.width; ++u) {
      const double du = u - cx;
      const double dv = v - cy;
      const double su = cs * du - sn * dv + cx;
      const double sv = sn * du + cs * dv + cy;
      const int iu = static_cast<int>(std::floor(su + 0.5));
      const int iv = static_cast<int>(std::floor(sv + 0.5));
      if (iu >= 0 && iv >= 0 && iu < rgb.width && iv < rgb.height) {
        std::copy_n(rgb.px(iu, iv), 3, out.px(u, v));
      }
    }
  }
  return out;
}

PoseSE3 mirror_pose(const PoseSE3& h) {
  const Eigen::Matrix3d m = Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal();
  const Eigen::Matrix3d r = m * h.rotation_matrix() * m;
  return {matrix_to_quat(r), m * h.translation()};
}

PointCloudMap mirror_cloud(const PointCloudMap& cloud) {
  PointCloudMap out = cloud;
  for (auto& p : out.points) p.x() = -p.x();
  return out;
}

AugmentResult apply_augmentation(const RgbImage& rgb, const PointCloudMap& cloud,
                                 const PoseSE3& h_gt, const CameraModel& cam,
                                 const AugmentDraw& draw) {
  AugmentResult res{color_jitter(rgb, draw.brightness, draw.contrast, draw.saturation), cloud, h_gt};
  if (draw.mirror) {
    res.rgb = mirror_rgb(res.rgb);
    res.cloud = mirror_cloud(res.cloud);
    res.pose = mirror_pose(res.pose);
  }
  if (draw.rotation != 0.0) {
    // Rz(theta) on the camera side turns pixel offsets by +theta in (u, v),
    // i.e. clockwise as displayed.
    res.rgb = rotate_rgb(res.rgb, -draw.rotation, cam.cx(), cam.cy());
    res.pose = pose_compose(
        PoseSE3(quat_from_axis_angle(Eigen::Vector3d::UnitZ(), draw.rotation), Eigen::Vector3d::Zero()),
        res.pose);
  }
  return res;
}

AugmentResult augment(const RgbImage& rgb, const PointCloudMap& cloud, const PoseSE3& h_gt,
                      const CameraModel& cam, const AugmentParams& params, std::uint64_t seed) {
  return apply_augmentation(rgb, cloud, h_gt, cam, sample_augmentation(params, seed));
}

}  // namespace maploc
