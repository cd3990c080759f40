#include <gtest/gtest.h>

#include <cstring>
#include <set>
#include <tuple>

#include "maploc/error.hpp"
#include "maploc/file_io.hpp"
#include "maploc/kitti_io.hpp"
#include "support.hpp"

namespace maploc {
namespace {

const std::filesystem::path kRoot = std::filesystem::path(MAPLOC_FIXTURE_DIR) / "kitti";

std::vector<std::byte> le_floats(std::initializer_list<float> values) {
  std::vector<std::byte> out;
  for (float f : values) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((u >> (8 * b)) & 0xFF));
  }
  return out;
}

TEST(Velodyne, SingleRecord) {
  const auto bytes = le_floats({1.0f, 2.0f, 3.0f, 0.5f});
  // 1.0f is 00 00 80 3f in little-endian order
  EXPECT_EQ(bytes[2], std::byte{0x80});
  EXPECT_EQ(bytes[3], std::byte{0x3f});
  const PointCloudMap scan = kitti::read_velodyne_scan(bytes);
  ASSERT_EQ(scan.size(), 1u);
  EXPECT_EQ(scan.points[0], Eigen::Vector3f(1, 2, 3));
  EXPECT_EQ(scan.intensity[0], 0.5f);
}

TEST(Velodyne, EmptyAndTruncated) {
  EXPECT_TRUE(kitti::read_velodyne_scan({}).empty());
  auto bytes = le_floats({1, 2, 3, 4});
  bytes.push_back(std::byte{0});
  try {
    kitti::read_velodyne_scan(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 16u);
  }
}

TEST(Velodyne, FixtureParsesAndRoundTrips) {
  const auto path = kRoot / "sequences/00/velodyne/000000.bin";
  const auto bytes = read_file_bytes(path);
  ASSERT_EQ(bytes.size(), 64u);
  const PointCloudMap scan = kitti::read_velodyne_file(path);
  ASSERT_EQ(scan.size(), 4u);
  EXPECT_EQ(scan.points[2], Eigen::Vector3f(12.0f, 0.0f, -0.5f));
  EXPECT_EQ(scan.intensity[3], 1.0f);
  EXPECT_EQ(kitti::write_velodyne_scan(scan), bytes);
}

TEST(Poses, IdentityRow) {
  const auto poses = kitti::read_poses("1 0 0 0 0 1 0 0 0 0 1 0\n");
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_TRUE(poses[0].matrix().isApprox(Eigen::Matrix4d::Identity()));
}

TEST(Poses, FixtureParsesAndRoundTrips) {
  const std::string text = read_file_text(kRoot / "poses/00.txt");
  const auto poses = kitti::read_poses(text);
  ASSERT_EQ(poses.size(), 3u);
  EXPECT_EQ(poses[2].translation(), Eigen::Vector3d(0, 0, 2));
  const auto again = kitti::read_poses(kitti::write_poses(poses));
  ASSERT_EQ(again.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(again[k].matrix(), poses[k].matrix());
}

TEST(Poses, ErrorsNameTheLine) {
  try {
    kitti::read_poses("1 0 0 0 0 1 0 0 0 0 1 0\n2 0 0 0 0 2 0 0 0 0 2 0\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  try {
    kitti::read_poses("1 0 0 0 0 1 0 0 0 0 1\n");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 1u);
  }
  EXPECT_THROW(kitti::read_poses("1 0 0 0 0 1 0 0 0 0 1 zz\n"), FormatError);
}

TEST(Calib, ReadsP2Only) {
  const CameraModel cam = kitti::read_calib("P2: 100 0 64 0 0 100 32 0 0 0 1 0\n", 128, 64);
  EXPECT_EQ(cam.fx(), 100.0);
  EXPECT_EQ(cam.fy(), 100.0);
  EXPECT_EQ(cam.cx(), 64.0);
  EXPECT_EQ(cam.cy(), 32.0);

  const CameraModel fixture = kitti::read_calib(read_file_text(kRoot / "sequences/00/calib.txt"), 128, 64);
  EXPECT_EQ(fixture.projection(0, 3), 5.0);
  EXPECT_EQ(fixture.width, 128);
}

TEST(Calib, MissingP2NamesTheKey) {
  try {
    kitti::read_calib("P0: 100 0 64 0 0 100 32 0 0 0 1 0\n", 128, 64);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("P2"), std::string::npos);
  }
  EXPECT_THROW(kitti::read_calib("P2: 1 2 3\n", 128, 64), FormatError);
}

TEST(BuildMap, SingleScanAtIdentity) {
  const PointCloudMap scan = kitti::read_velodyne_file(kRoot / "sequences/00/velodyne/000000.bin");
  const std::vector<PointCloudMap> scans{scan};
  const std::vector<PoseSE3> poses{PoseSE3::identity()};
  const PointCloudMap m = kitti::build_map(scans, poses, 0.1);
  EXPECT_EQ(m.points, voxel_downsample(scan, 0.1).points);
}

TEST(BuildMap, DisjointPosesDoubleTheCount) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<float> u(-5.0f, 5.0f);
  PointCloudMap scan;
  for (int k = 0; k < 2000; ++k) scan.push_back({u(rng), u(rng), u(rng)}, 0.0f);
  const std::vector<PointCloudMap> scans{scan, scan};
  const std::vector<PoseSE3> poses{PoseSE3::identity(), PoseSE3::from_translation({100, 0, 0})};
  const std::size_t single = voxel_downsample(scan, 0.1).size();
  const std::size_t both = kitti::build_map(scans, poses, 0.1).size();
  EXPECT_LE(both, 2 * single);
  EXPECT_GE(both, 2 * single - 2);
}

TEST(BuildMap, FixtureMatchesBruteForce) {
  const auto paths = kitti::SequencePaths::from_root(kRoot, "00");
  const auto files = paths.scan_files();
  ASSERT_EQ(files.size(), 3u);
  const auto poses = kitti::read_poses(read_file_text(paths.poses));
  const auto tr = kitti::find_calib_matrix(read_file_text(paths.calib), "Tr");
  ASSERT_TRUE(tr.has_value());
  const PoseSE3 cam_from_velo = PoseSE3::from_matrix3x4(*tr);

  std::vector<PointCloudMap> scans;
  std::vector<PoseSE3> map_from_velo;
  std::set<std::tuple<long long, long long, long long>> cells;
  for (std::size_t k = 0; k < 3; ++k) {
    scans.push_back(kitti::read_velodyne_file(files[k]));
    map_from_velo.push_back(pose_compose(poses[k], cam_from_velo));
    const Eigen::Matrix4d m = test::homogeneous(poses[k]) * test::homogeneous(cam_from_velo);
    for (const auto& p : scans.back().points) {
      const Eigen::Vector4d w = m * Eigen::Vector4d(p.x(), p.y(), p.z(), 1.0);
      cells.emplace(static_cast<long long>(std::floor(w.x() / 0.1 + 1e-9)),
                    static_cast<long long>(std::floor(w.y() / 0.1 + 1e-9)),
                    static_cast<long long>(std::floor(w.z() / 0.1 + 1e-9)));
    }
  }
  const PointCloudMap m = kitti::build_map(scans, map_from_velo, 0.1);
  // the three scans see the same four static points
  EXPECT_EQ(cells.size(), 4u);
  EXPECT_EQ(m.size(), cells.size());
  EXPECT_NEAR(m.points[0].z(), 8.0f, 1e-4);
}

}  // namespace
}  // namespace maploc
