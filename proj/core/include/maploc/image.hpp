#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "maploc/camera.hpp"
#include "maploc/se3.hpp"

namespace maploc {

/// Synthesized LiDAR-image: camera-frame depth in meters per pixel, 0 = no return.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth;  ///< row-major, width * height
  PoseSE3 generating_pose;
  CameraModel camera;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0f) {}

  float& at(int u, int v) { return depth[static_cast<std::size_t>(v) * width + u]; }
  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool in_bounds(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  std::size_t nonzero_count() const;
};

/// 8-bit interleaved RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  ///< row-major, 3 bytes per pixel

  RgbImage() = default;
  RgbImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0) {}

  std::uint8_t* px(int u, int v) { return &data[(static_cast<std::size_t>(v) * width + u) * 3]; }
  const std::uint8_t* px(int u, int v) const {
    return &data[(static_cast<std::size_t>(v) * width + u) * 3];
  }
  bool operator==(const RgbImage&) const = default;
};

/// Counts per meter of the 16-bit PNG export (range 0..256 m).
inline constexpr double kDepthPngScale = 256.0;

/// 16-bit grayscale PNG, value = round(depth * 256) clamped to 65535. The
/// scale is recorded in a tEXt chunk.
std::vector<std::byte> encode_depth_png(const DepthImage& img);
void write_depth_png(const DepthImage& img, const std::filesystem::path& path);

std::vector<std::byte> encode_rgb_png(const RgbImage& img);
void write_rgb_png(const RgbImage& img, const std::filesystem::path& path);
/// Reads 8-bit gray/RGB/RGBA (and 16-bit, truncated) PNG files into RGB.
RgbImage read_rgb_png(const std::filesystem::path& path);

// Raw depth dump, little-endian:
//   bytes 0..7     "MLDEPTH1"
//   bytes 8..23    uint32 width, height, pad_right, pad_bottom
//   bytes 24..31   reserved (zero)
//   bytes 32..127  generating pose, 12 float64, row-major [R|T]
//   then width * height float32 depths, row-major.
inline constexpr std::size_t kDepthRawHeaderSize = 128;

std::vector<std::byte> encode_depth_raw(const DepthImage& img);
/// The camera of the decoded image only carries width/height/padding.
DepthImage decode_depth_raw(std::span<const std::byte> bytes);
void write_depth_raw(const DepthImage& img, const std::filesystem::path& path);
DepthImage read_depth_raw(const std::filesystem::path& path);

/// Depth points drawn over an RGB image (or black) with a near-blue / far-red
/// colour ramp. `max_depth` <= 0 uses the image maximum.
RgbImage depth_overlay(const DepthImage& depth, const RgbImage* background, double max_depth = 0.0);

}  // namespace maploc
