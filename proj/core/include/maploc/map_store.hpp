#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "maploc/se3.hpp"

namespace maploc {

/// LiDAR map: points in the map frame, optional intensity in [0, 1].
struct PointCloudMap {
  std::vector<Eigen::Vector3f> points;
  std::vector<float> intensity;  ///< empty, or one value per point
  double voxel_resolution = 0.0;  ///< 0 = not downsampled

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_intensity() const { return !intensity.empty(); }

  void push_back(const Eigen::Vector3f& p) { points.push_back(p); }
  void push_back(const Eigen::Vector3f& p, float i) {
    points.push_back(p);
    intensity.push_back(i);
  }
  void reserve(std::size_t n, bool with_intensity);
  /// Appends `other`; intensity is kept only if both clouds carry it.
  void append(const PointCloudMap& other);
};

/// Half-widths of the crop box in the virtual camera frame. z is forward-only.
struct CropSpec {
  double forward = 100.0;
  double lateral = 50.0;
  double vertical = 25.0;

  void validate() const;
};

/// One centroid per occupied cell of side `resolution`; output sorted by cell
/// index so the result does not depend on input order (up to summation order).
PointCloudMap voxel_downsample(const PointCloudMap& cloud, double resolution);

/// Keeps the points whose camera-frame coordinates satisfy z in (0, forward],
/// |x| <= lateral and |y| <= vertical. Input order is preserved.
PointCloudMap crop_local(const PointCloudMap& map, const PoseSE3& h_init, const CropSpec& spec);

/// Rigidly moves every point (h maps the cloud's frame into the target frame).
PointCloudMap transform_cloud(const PointCloudMap& cloud, const PoseSE3& h);

// Binary container:
//   bytes 0..7   "MLMAPBIN"
//   bytes 8..9   uint16 version (1), little-endian
//   bytes 10..11 uint16 flags (bit 0: intensity present)
//   bytes 12..15 float32 voxel resolution
//   uint64 point count, then float32 x, y, z (, intensity) records, little-endian.
inline constexpr std::string_view kMapMagic = "MLMAPBIN";
inline constexpr std::uint16_t kMapVersion = 1;

std::vector<std::byte> encode_map_binary(const PointCloudMap& map);
PointCloudMap decode_map_binary(std::span<const std::byte> bytes);
void save_map(const PointCloudMap& map, const std::filesystem::path& path);
PointCloudMap load_map(const std::filesystem::path& path);

/// Debug format: one "x y z [intensity]" line per point.
std::string encode_map_ascii(const PointCloudMap& map);
PointCloudMap decode_map_ascii(std::string_view text);

}  // namespace maploc
