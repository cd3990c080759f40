#include "maploc/kitti_io.hpp"

#include <algorithm>

#include <Eigen/Dense>

#include "byte_io.hpp"
#include "maploc/error.hpp"
#include "text_util.hpp"

namespace maploc::kitti {

PointCloudMap read_velodyne_scan(std::span<const std::byte> bytes) {
  constexpr std::size_t kRecord = 16;
  const std::size_t whole = bytes.size() / kRecord;
  if (bytes.size() % kRecord != 0) {
    throw FormatError("truncated velodyne record", whole * kRecord);
  }
  PointCloudMap scan;
  scan.reserve(whole, true);
  for (std::size_t k = 0; k < whole; ++k) {
    const std::size_t o = k * kRecord;
    scan.push_back({detail::get_f32(bytes, o), detail::get_f32(bytes, o + 4),
                    detail::get_f32(bytes, o + 8)},
                   detail::get_f32(bytes, o + 12));
  }
  return scan;
}

PointCloudMap read_velodyne_file(const std::filesystem::path& path) {
  return read_velodyne_scan(read_file_bytes(path));
}

std::vector<std::byte> write_velodyne_scan(const PointCloudMap& scan) {
  std::vector<std::byte> out;
  out.reserve(scan.size() * 16);
  for (std::size_t k = 0; k < scan.size(); ++k) {
    detail::put_f32(out, scan.points[k].x());
    detail::put_f32(out, scan.points[k].y());
    detail::put_f32(out, scan.points[k].z());
    detail::put_f32(out, scan.has_intensity() ? scan.intensity[k] : 0.0f);
  }
  return out;
}

namespace {

constexpr double kPoseRotationTolerance = 1e-3;

PoseSE3 pose_from_row(const std::vector<double>& v, std::size_t line_no) {
  Eigen::Matrix<double, 3, 4> rt;
  for (int i = 0; i < 12; ++i) {
    rt(i / 4, i % 4) = v[static_cast<std::size_t>(i)];
  }
  if (!rt.allFinite()) {
    throw FormatError("non-finite pose entry", line_no);
  }
  const Eigen::Matrix3d r = rt.leftCols<3>();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = r.determinant();
  if (ortho > kPoseRotationTolerance || std::abs(det - 1.0) > kPoseRotationTolerance) {
    throw FormatError("rotation block is not a rotation (orthogonality error " +
                          std::to_string(ortho) + ", det " + std::to_string(det) + ")",
                      line_no);
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d snapped = svd.matrixU() * svd.matrixV().transpose();
  return {matrix_to_quat(snapped), rt.col(3)};
}

}  // namespace

std::vector<PoseSE3> read_poses(std::string_view text) {
  std::vector<PoseSE3> poses;
  const auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = detail::trim(lines[n]);
    if (line.empty()) {
      continue;
    }
    const auto v = detail::parse_doubles(line, n + 1);
    if (v.size() != 12) {
      throw FormatError("pose line needs 12 numbers, got " + std::to_string(v.size()), n + 1);
    }
    poses.push_back(pose_from_row(v, n + 1));
  }
  return poses;
}

std::string write_poses(std::span<const PoseSE3> poses) {
  std::string out;
  for (const auto& p : poses) {
    out += format_pose(p);
    out += '\n';
  }
  return out;
}

std::optional<Eigen::Matrix<double, 3, 4>> find_calib_matrix(std::string_view text,
                                                             std::string_view key) {
  const auto lines = detail::split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    const auto line = detail::trim(lines[n]);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || detail::trim(line.substr(0, colon)) != key) {
      continue;
    }
    const auto v = detail::parse_doubles(line.substr(colon + 1), n + 1);
    if (v.size() != 12) {
      throw FormatError("calib entry '" + std::string(key) + "' needs 12 numbers", n + 1);
    }
    Eigen::Matrix<double, 3, 4> m;
    for (int i = 0; i < 12; ++i) {
      m(i / 4, i % 4) = v[static_cast<std::size_t>(i)];
    }
    return m;
  }
  return std::nullopt;
}

CameraModel read_calib(std::string_view text, int width, int height) {
  const auto p2 = find_calib_matrix(text, "P2");
  if (!p2) {
    throw FormatError("calibration has no 'P2' entry", 0);
  }
  CameraModel cam;
  cam.projection = *p2;
  cam.width = width;
  cam.height = height;
  cam.validate();
  return cam;
}

PointCloudMap build_map(std::span<const PointCloudMap> scans,
                        std::span<const PoseSE3> scan_poses, double resolution) {
  if (scans.size() != scan_poses.size()) {
    throw InvalidArgument("build_map: " + std::to_string(scans.size()) + " scans but " +
                          std::to_string(scan_poses.size()) + " poses");
  }
  PointCloudMap merged;
  std::size_t total = 0;
  bool with_i = !scans.empty();
  for (const auto& s : scans) {
    total += s.size();
    with_i = with_i && s.has_intensity();
  }
  merged.reserve(total, with_i);
  for (std::size_t k = 0; k < scans.size(); ++k) {
    PointCloudMap moved = transform_cloud(scans[k], scan_poses[k]);
    if (!with_i) {
      moved.intensity.clear();
    }
    merged.points.insert(merged.points.end(), moved.points.begin(), moved.points.end());
    merged.intensity.insert(merged.intensity.end(), moved.intensity.begin(), moved.intensity.end());
  }
  return voxel_downsample(merged, resolution);
}

SequencePaths SequencePaths::from_root(const std::filesystem::path& root,
                                       const std::string& sequence) {
  SequencePaths p;
  const auto seq_dir = root / "sequences" / sequence;
  p.velodyne_dir = seq_dir / "velodyne";
  p.image_dir = seq_dir / "image_2";
  p.calib = seq_dir / "calib.txt";
  p.poses = root / "poses" / (sequence + ".txt");
  return p;
}

std::vector<std::filesystem::path> SequencePaths::scan_files() const {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(velodyne_dir)) {
    return files;
  }
  for (const auto& entry : std::filesystem::directory_iterator(velodyne_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace maploc::kitti
