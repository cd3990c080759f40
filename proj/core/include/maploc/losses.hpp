#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "maploc/se3.hpp"

namespace maploc {

/// Regression target / prediction: translation in meters and a rotation
/// quaternion. Predictions may carry an unnormalized quaternion.
struct PoseTarget {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Quat rotation;

  /// Normalizes the rotation; throws InvalidArgument for a zero quaternion.
  PoseSE3 to_pose() const { return {rotation.normalized(), translation}; }
  static PoseTarget from_pose(const PoseSE3& h) { return {h.translation(), h.rotation()}; }
};

/// Smooth-L1 summed over the three components (transition at |x| = 1).
double translation_loss(const Eigen::Vector3d& t_pred, const Eigen::Vector3d& t_gt);

/// Angular distance between q_gt and the normalized prediction, in [0, pi/2].
double rotation_loss(const Quat& q_gt, const Quat& q_pred_raw);

/// Unweighted sum of translation and rotation loss.
double total_loss(const Eigen::Vector3d& t_pred, const Eigen::Vector3d& t_gt, const Quat& q_gt,
                  const Quat& q_pred_raw);

Eigen::Vector3d translation_loss_gradient(const Eigen::Vector3d& t_pred, const Eigen::Vector3d& t_gt);

/// Analytic gradient of rotation_loss with respect to the raw 4 prediction
/// components (a, b, c, d). Uses the zero subgradient at an exact match and
/// where the relative quaternion has a == 0.
Eigen::Vector4d rotation_loss_gradient(const Quat& q_gt, const Quat& q_pred_raw);

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps).
std::vector<double> numerical_gradient(const ScalarFunction& f, std::span<const double> x,
                                       double eps);

}  // namespace maploc
