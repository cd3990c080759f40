#include "maploc/losses.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "maploc/error.hpp"

namespace maploc {

namespace {

double smooth_l1(double x) {
  const double ax = std::abs(x);
  return ax < 1.0 ? 0.5 * x * x : ax - 0.5;
}

double smooth_l1_grad(double x) {
  return std::abs(x) < 1.0 ? x : (x > 0.0 ? 1.0 : -1.0);
}

/// Left-multiplication matrix: L(q) * p == quat_mul(q, p) on coefficient vectors.
Eigen::Matrix4d left_mul_matrix(const Quat& q) {
  Eigen::Matrix4d l;
  l << q.a, -q.b, -q.c, -q.d,
       q.b,  q.a, -q.d,  q.c,
       q.c,  q.d,  q.a, -q.b,
       q.d, -q.c,  q.b,  q.a;
  return l;
}

}  // namespace

double translation_loss(const Eigen::Vector3d& t_pred, const Eigen::Vector3d& t_gt) {
  const Eigen::Vector3d d = t_pred - t_gt;
  return smooth_l1(d.x()) + smooth_l1(d.y()) + smooth_l1(d.z());
}

Eigen::Vector3d translation_loss_gradient(const Eigen::Vector3d& t_pred,
                                          const Eigen::Vector3d& t_gt) {
  const Eigen::Vector3d d = t_pred - t_gt;
  return {smooth_l1_grad(d.x()), smooth_l1_grad(d.y()), smooth_l1_grad(d.z())};
}

double rotation_loss(const Quat& q_gt, const Quat& q_pred_raw) {
  return angular_distance(q_gt, q_pred_raw.normalized());
}

double total_loss(const Eigen::Vector3d& t_pred, const Eigen::Vector3d& t_gt, const Quat& q_gt,
                  const Quat& q_pred_raw) {
  return translation_loss(t_pred, t_gt) + rotation_loss(q_gt, q_pred_raw);
}

Eigen::Vector4d rotation_loss_gradient(const Quat& q_gt, const Quat& q_pred_raw) {
  const double r_norm = q_pred_raw.norm();
  const Quat p = q_pred_raw.normalized();
  const Eigen::Vector4d pc = p.coeffs();

  // m = q_gt * conj(p) is linear in p.
  const Eigen::Matrix4d jm =
      left_mul_matrix(q_gt) * Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
  const Eigen::Vector4d m = jm * pc;

  const double x = std::abs(m[0]);
  const double y = m.tail<3>().norm();
  const double s = x * x + y * y;
  Eigen::Vector4d grad_m = Eigen::Vector4d::Zero();
  if (m[0] != 0.0) {
    grad_m[0] = -y * (m[0] > 0.0 ? 1.0 : -1.0) / s;
  }
  if (y > 0.0) {
    grad_m.tail<3>() = (x / (y * s)) * m.tail<3>();
  }
  const Eigen::Vector4d grad_p = jm.transpose() * grad_m;
  // d(r / |r|) / dr = (I - p p^T) / |r|
  return (grad_p - pc * pc.dot(grad_p)) / r_norm;
}

std::vector<double> numerical_gradient(const ScalarFunction& f, std::span<const double> x,
                                       double eps) {
  if (!(eps > 0.0)) {
    throw InvalidArgument("numerical_gradient: eps must be positive");
  }
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double fp = f(probe);
    probe[i] = x[i] - eps;
    const double fm = f(probe);
    probe[i] = x[i];
    grad[i] = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

}  // namespace maploc
