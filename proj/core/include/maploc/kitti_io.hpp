#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "maploc/camera.hpp"
#include "maploc/map_store.hpp"
#include "maploc/se3.hpp"

namespace maploc::kitti {

/// Velodyne scan: packed little-endian float32 records (x, y, z, intensity).
/// A trailing partial record raises FormatError with the byte offset of the
/// incomplete record.
PointCloudMap read_velodyne_scan(std::span<const std::byte> bytes);
PointCloudMap read_velodyne_file(const std::filesystem::path& path);
std::vector<std::byte> write_velodyne_scan(const PointCloudMap& scan);

/// Poses file: one row-major 3x4 [R|T] per non-empty line. R is snapped to the
/// closest rotation when it is within 1e-3 of one; otherwise FormatError
/// (offset = line number).
std::vector<PoseSE3> read_poses(std::string_view text);
std::string write_poses(std::span<const PoseSE3> poses);

/// Looks up a "KEY: v0 v1 ..." entry with 12 values in a calib.txt.
std::optional<Eigen::Matrix<double, 3, 4>> find_calib_matrix(std::string_view text,
                                                             std::string_view key);

/// Camera model from the P2 entry (left colour camera). Image size is not part
/// of calib.txt and has to be supplied.
CameraModel read_calib(std::string_view text, int width, int height);

/// Transforms every scan into the map frame by its map-from-sensor pose,
/// concatenates them in list order and voxel-downsamples the result.
PointCloudMap build_map(std::span<const PointCloudMap> scans,
                        std::span<const PoseSE3> scan_poses, double resolution);

/// Paths of the KITTI odometry layout below a dataset root.
struct SequencePaths {
  std::filesystem::path velodyne_dir;
  std::filesystem::path image_dir;
  std::filesystem::path calib;
  std::filesystem::path poses;

  static SequencePaths from_root(const std::filesystem::path& root, const std::string& sequence);
  /// Sorted list of velodyne/*.bin files.
  std::vector<std::filesystem::path> scan_files() const;
};

/// Train / validation split used for the odometry benchmark experiments.
inline constexpr std::string_view kTrainSequences[] = {"03", "04", "05", "06", "07", "08", "09"};
inline constexpr std::string_view kValidationSequence = "00";

}  // namespace maploc::kitti
