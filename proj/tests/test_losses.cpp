#include <gtest/gtest.h>

#include "maploc/losses.hpp"
#include "support.hpp"

namespace maploc {
namespace {

using test::kPi;

double hand_smooth_l1(double x) { return std::abs(x) < 1.0 ? 0.5 * x * x : std::abs(x) - 0.5; }

TEST(TranslationLoss, PiecewiseValues) {
  const Eigen::Vector3d gt(1.0, -2.0, 3.0);
  EXPECT_EQ(translation_loss(gt, gt), 0.0);
  EXPECT_NEAR(translation_loss(gt + Eigen::Vector3d(0.5, 0, 0), gt), 0.125, 1e-12);
  EXPECT_NEAR(translation_loss(gt + Eigen::Vector3d(2, 0, 0), gt), 1.5, 1e-12);
  std::mt19937_64 rng(20);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d d = test::random_vec(rng, 3.0);
    const double oracle = hand_smooth_l1(d.x()) + hand_smooth_l1(d.y()) + hand_smooth_l1(d.z());
    EXPECT_NEAR(translation_loss(gt + d, gt), oracle, 1e-12);
  }
}

TEST(RotationLoss, KnownValues) {
  std::mt19937_64 rng(21);
  const Quat q = test::random_quat(rng);
  EXPECT_NEAR(rotation_loss(q, {2 * q.a, 2 * q.b, 2 * q.c, 2 * q.d}), 0.0, 1e-12);
  EXPECT_NEAR(rotation_loss(q, -q), 0.0, 1e-12);
  const Quat z90{std::sqrt(0.5), 0, 0, std::sqrt(0.5)};
  EXPECT_NEAR(rotation_loss(Quat::identity(), z90), 0.5 * test::trace_angle(test::eigen_matrix(z90)), 1e-12);
}

TEST(RotationLoss, MetricProperties) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 1000; ++i) {
    const Quat p = test::random_quat(rng);
    const Quat q = test::random_quat(rng);
    const Quat g = test::random_quat(rng);
    EXPECT_GT(rotation_loss(p, q), 0.0);
    EXPECT_NEAR(rotation_loss(p, p), 0.0, 1e-9);
    EXPECT_NEAR(rotation_loss(p, -q), rotation_loss(p, q), 1e-9);
    EXPECT_NEAR(rotation_loss(quat_mul(g, p), quat_mul(g, q)), rotation_loss(p, q), 1e-9);
  }
}

TEST(TotalLoss, IsSumOfParts) {
  const Eigen::Vector3d gt = Eigen::Vector3d::Zero();
  EXPECT_EQ(total_loss(gt, gt, Quat::identity(), Quat::identity()), 0.0);
  EXPECT_NEAR(total_loss({2, 0, 0}, gt, Quat::identity(), Quat::identity()), 1.5, 1e-12);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d t = test::random_vec(rng, 2.0);
    const Quat qg = test::random_quat(rng);
    const Quat qp = test::random_quat(rng);
    EXPECT_NEAR(total_loss(t, gt, qg, qp), translation_loss(t, gt) + rotation_loss(qg, qp), 1e-12);
  }
}

TEST(NumericalGradient, Quadratic) {
  const ScalarFunction f = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
  const std::vector<double> x{1.0, 2.0};
  const auto g = numerical_gradient(f, x, 1e-5);
  EXPECT_NEAR(g[0], 2.0, 1e-6);
  EXPECT_NEAR(g[1], 4.0, 1e-6);
}

TEST(RotationLossGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  int checked = 0;
  while (checked < 500) {
    const Quat qg = test::random_quat(rng);
    Quat qp = test::random_quat(rng);
    // keep away from the kinks at a = 0 and at coincidence
    const double d = rotation_loss(qg, qp);
    if (d < 0.05 || d > kPi / 2.0 - 0.05) continue;
    const double s = scale(rng);
    qp = {s * qp.a, s * qp.b, s * qp.c, s * qp.d};
    const ScalarFunction f = [&](std::span<const double> x) {
      return rotation_loss(qg, {x[0], x[1], x[2], x[3]});
    };
    const std::vector<double> x{qp.a, qp.b, qp.c, qp.d};
    const auto num = numerical_gradient(f, x, 1e-6);
    const Eigen::Vector4d ana = rotation_loss_gradient(qg, qp);
    const Eigen::Vector4d numv(num[0], num[1], num[2], num[3]);
    ASSERT_TRUE(ana.allFinite());
    EXPECT_LT((ana - numv).norm() / std::max(numv.norm(), 1e-12), 1e-4);
    ++checked;
  }
}

TEST(RotationLossGradient, FiniteNearSingularSet) {
  // relative rotation approaching pi: scalar part of q_gt * conj(q_pred) -> 0
  double prev = 0.0;
  for (int k = 1; k <= 12; ++k) {
    const double eps = std::pow(10.0, -k);
    const double half = kPi / 2.0 - eps;
    const Quat qp{std::cos(half), 0.0, 0.0, std::sin(half)};
    const Eigen::Vector4d g = rotation_loss_gradient(Quat::identity(), qp);
    EXPECT_TRUE(g.allFinite()) << "eps " << eps;
    EXPECT_GE(g.norm(), prev - 1e-9);
    prev = g.norm();
  }
}

}  // namespace
}  // namespace maploc
