#include <gtest/gtest.h>

#include "maploc/error.hpp"
#include "maploc/se3.hpp"
#include "support.hpp"

namespace maploc {
namespace {

using test::kDeg;
using test::kPi;

const Quat kZ90{std::sqrt(0.5), 0.0, 0.0, std::sqrt(0.5)};

TEST(Quat, IdentityIsNeutral) {
  std::mt19937_64 rng(1);
  const Quat q = test::random_quat(rng);
  const Quat r = quat_mul(Quat::identity(), q);
  EXPECT_DOUBLE_EQ(r.a, q.a);
  EXPECT_DOUBLE_EQ(r.d, q.d);
}

TEST(Quat, TimesInverseIsIdentity) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const Quat q = test::random_quat(rng);
    const Quat r = quat_mul(q, quat_inv(q));
    EXPECT_NEAR(r.a, 1.0, 1e-12);
    EXPECT_NEAR(r.vec().norm(), 0.0, 1e-12);
  }
}

TEST(Quat, QuarterTurnsAboutZCompose) {
  const Quat r = quat_mul(kZ90, kZ90);
  const Eigen::Matrix3d oracle = test::eigen_matrix(kZ90) * test::eigen_matrix(kZ90);
  const Eigen::Quaterniond back(oracle);
  EXPECT_TRUE(test::same_rotation(r, {back.w(), back.x(), back.y(), back.z()}, 1e-12));
  EXPECT_NEAR(r.a, 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r.d), 1.0, 1e-12);
}

TEST(Quat, InverseConjugates) {
  const Quat i = quat_inv(kZ90);
  EXPECT_NEAR(i.a, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(i.d, -std::sqrt(0.5), 1e-15);
  EXPECT_EQ(quat_inv(Quat::identity()), Quat::identity());
  const Quat twice = quat_inv(quat_inv(kZ90));
  EXPECT_DOUBLE_EQ(twice.a, kZ90.a);
  EXPECT_DOUBLE_EQ(twice.d, kZ90.d);
}

TEST(Quat, InverseRejectsZero) {
  EXPECT_THROW(quat_inv({0.0, 0.0, 0.0, 0.0}), InvalidArgument);
}

TEST(AngularDistance, Basics) {
  std::mt19937_64 rng(3);
  const Quat q = test::random_quat(rng);
  EXPECT_NEAR(angular_distance(q, q), 0.0, 1e-12);
  EXPECT_NEAR(angular_distance(q, -q), 0.0, 1e-12);
  const double oracle = 0.5 * test::trace_angle(test::eigen_matrix(kZ90));
  EXPECT_NEAR(angular_distance(Quat::identity(), kZ90), oracle, 1e-12);
  EXPECT_NEAR(angular_distance(Quat::identity(), kZ90), kPi / 4.0, 1e-12);
}

TEST(AngularDistance, HalfOfTraceAngleOnRandomPairs) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Quat p = test::random_quat(rng);
    const Quat q = test::random_quat(rng);
    const Eigen::Matrix3d rel = test::eigen_matrix(p).transpose() * test::eigen_matrix(q);
    EXPECT_NEAR(angular_distance(p, q), 0.5 * test::trace_angle(rel), 1e-7);
  }
}

TEST(QuatMatrix, KnownValues) {
  EXPECT_TRUE(quat_to_matrix(Quat::identity()).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  Eigen::Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_TRUE(quat_to_matrix(kZ90).isApprox(expected, 1e-12));
}

TEST(QuatMatrix, AgreesWithEigenAndRoundTrips) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Quat q = test::random_quat(rng);
    EXPECT_LT((quat_to_matrix(q) - test::eigen_matrix(q)).norm(), 1e-12);
    EXPECT_TRUE(test::same_rotation(matrix_to_quat(quat_to_matrix(q)), q, 1e-12));
    EXPECT_GE(matrix_to_quat(quat_to_matrix(q)).a, 0.0);
  }
}

TEST(QuatMatrix, AxisAngleMatchesEigen) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d axis = test::random_vec(rng, 1.0).normalized();
    const double angle = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    const Eigen::Matrix3d oracle = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    EXPECT_LT((quat_to_matrix(quat_from_axis_angle(axis, angle)) - oracle).norm(), 1e-12);
    EXPECT_NEAR(rotation_angle(quat_from_axis_angle(axis, angle)), std::abs(angle), 1e-9);
  }
}

TEST(Euler, ZyxRoundTripAndOrder) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 200; ++i) {
    const double z = u(rng), y = u(rng), x = u(rng);
    const Eigen::Matrix3d oracle = (Eigen::AngleAxisd(z, Eigen::Vector3d::UnitZ()) *
                                    Eigen::AngleAxisd(y, Eigen::Vector3d::UnitY()) *
                                    Eigen::AngleAxisd(x, Eigen::Vector3d::UnitX()))
                                       .toRotationMatrix();
    const Quat q = quat_from_euler_zyx(z, y, x);
    EXPECT_LT((quat_to_matrix(q) - oracle).norm(), 1e-12);
    const Eigen::Vector3d back = euler_zyx_from_matrix(oracle);
    EXPECT_NEAR(back[0], z, 1e-9);
    EXPECT_NEAR(back[1], y, 1e-9);
    EXPECT_NEAR(back[2], x, 1e-9);
  }
}

TEST(Pose, ComposeWithInverseIsIdentity) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const PoseSE3 h = test::random_pose(rng);
    const PoseSE3 e = pose_compose(h, pose_inverse(h));
    EXPECT_TRUE(test::same_rotation(e.rotation(), Quat::identity(), 1e-12));
    EXPECT_LT(e.translation().norm(), 1e-12);
  }
}

TEST(Pose, Apply) {
  const Eigen::Vector3d p(1, 2, 3);
  EXPECT_EQ(apply(PoseSE3::identity(), p), p);
  const PoseSE3 h(kZ90, {0, 0, 5});
  const Eigen::Vector4d oracle = test::homogeneous(h) * Eigen::Vector4d(1, 0, 0, 1);
  const Eigen::Vector3d r = apply(h, {1, 0, 0});
  EXPECT_LT((r - oracle.head<3>()).norm(), 1e-12);
  EXPECT_LT((r - Eigen::Vector3d(0, 1, 5)).norm(), 1e-12);
}

TEST(Pose, ComposeMatchesMatrixProduct) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    const PoseSE3 a = test::random_pose(rng);
    const PoseSE3 b = test::random_pose(rng);
    const Eigen::Matrix4d oracle = test::homogeneous(a) * test::homogeneous(b);
    EXPECT_LT((pose_compose(a, b).matrix() - oracle).norm(), 1e-10);
  }
}

TEST(Pose, TextRoundTrip) {
  std::mt19937_64 rng(10);
  const PoseSE3 h = test::random_pose(rng);
  const PoseSE3 back = parse_pose(format_pose(h));
  EXPECT_LT((back.matrix() - h.matrix()).norm(), 1e-12);
  EXPECT_THROW(parse_pose("1 0 0"), FormatError);
}

TEST(Noise, BoundsAndZeroSpec) {
  std::mt19937_64 rng(11);
  const PoseSE3 gt = test::random_pose(rng);
  const NoiseSpec spec{2.0, 10.0 * kDeg};
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const PoseError e = pose_error(gt, sample_init_pose(gt, spec, seed));
    for (std::size_t a = 0; a < 3; ++a) EXPECT_LE(std::abs(e.components[a]), 2.0 + 1e-9);
    for (std::size_t a = 3; a < 6; ++a) EXPECT_LE(std::abs(e.components[a]), 10.0 * kDeg + 1e-9);
  }
  const PoseSE3 same = sample_init_pose(gt, {}, 5);
  EXPECT_EQ(same.rotation(), gt.rotation());
  EXPECT_EQ(same.translation(), gt.translation());
}

TEST(Noise, OffsetsAreCentred) {
  const PoseSE3 gt = PoseSE3::identity();
  const NoiseSpec spec{2.0, 10.0 * kDeg};
  const int n = 100000;
  std::array<double, 6> sum{};
  for (int s = 0; s < n; ++s) {
    const PoseError e = pose_error(gt, sample_init_pose(gt, spec, static_cast<std::uint64_t>(s)));
    for (std::size_t a = 0; a < 6; ++a) sum[a] += e.components[a];
  }
  // standard error of the mean of a uniform on [-w, w] is w / sqrt(3 n)
  for (std::size_t a = 0; a < 6; ++a) {
    const double w = a < 3 ? 2.0 : 10.0 * kDeg;
    EXPECT_LT(std::abs(sum[a] / n), 3.0 * w / std::sqrt(3.0 * n)) << "axis " << a;
  }
}

TEST(PoseErrorTest, ZeroForSamePose) {
  std::mt19937_64 rng(12);
  const PoseSE3 h = test::random_pose(rng);
  const PoseError e = pose_error(h, h);
  for (double c : e.components) EXPECT_NEAR(c, 0.0, 1e-9);
  EXPECT_NEAR(e.total_angle, 0.0, 1e-7);
}

TEST(PoseErrorTest, ShiftAlongOpticalAxisIsLongitudinal) {
  std::mt19937_64 rng(13);
  const PoseSE3 gt = test::random_pose(rng);
  // camera centre moved 1 m along the gt viewing direction
  const Eigen::Vector3d centre = -(gt.rotation_matrix().transpose() * gt.translation());
  const Eigen::Vector3d moved = centre + gt.rotation_matrix().transpose() * Eigen::Vector3d::UnitZ();
  const PoseSE3 est(gt.rotation(), -(gt.rotation_matrix() * moved));
  const PoseError e = pose_error(gt, est);
  EXPECT_NEAR(e.components[kLongitudinal], 1.0, 1e-9);
  for (std::size_t a = 1; a < 6; ++a) EXPECT_NEAR(e.components[a], 0.0, 1e-9);
}

TEST(PoseErrorTest, TotalAngleMatchesTrace) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    const PoseSE3 a = test::random_pose(rng);
    const PoseSE3 b = test::random_pose(rng);
    const Eigen::Matrix3d rel = test::eigen_matrix(b.rotation()) * test::eigen_matrix(a.rotation()).transpose();
    EXPECT_NEAR(pose_error(a, b).total_angle, test::trace_angle(rel), 1e-7);
  }
}

}  // namespace
}  // namespace maploc
