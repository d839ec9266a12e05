#include "stochmap/transforms2d.hpp"

#include <cmath>

#include "stochmap/error.hpp"

namespace stochmap {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw Error(ErrorKind::InvalidValue, "angle is not finite");
  }
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r -= 2.0 * kPi;
  return r;
}

Pose2::Pose2(double x, double y, double phi) : x_(x), y_(y), phi_(normalize_angle(phi)) {
  if (!std::isfinite(x) || !std::isfinite(y)) {
    throw Error(ErrorKind::InvalidValue, "pose translation is not finite");
  }
}

Pose2 Pose2::from_vector(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "Pose2 needs 3 components");
  }
  return {v(0), v(1), v(2)};
}

Pose2 compose2(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.phi());
  const double s = std::sin(a.phi());
  return {b.x() * c - b.y() * s + a.x(), b.x() * s + b.y() * c + a.y(), a.phi() + b.phi()};
}

Pose2 inverse2(const Pose2& a) {
  const double c = std::cos(a.phi());
  const double s = std::sin(a.phi());
  return {-a.x() * c - a.y() * s, a.x() * s - a.y() * c, -a.phi()};
}

CompoundJacobian2 jac_compose2(const Pose2& a, const Pose2& /*b*/, const Pose2& result) {
  const double c = std::cos(a.phi());
  const double s = std::sin(a.phi());
  CompoundJacobian2 j;
  j << 1.0, 0.0, -(result.y() - a.y()), c, -s, 0.0,
       0.0, 1.0, result.x() - a.x(), s, c, 0.0,
       0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  return j;
}

ReverseJacobian2 jac_inverse2(const Pose2& a, const Pose2& result) {
  const double c = std::cos(a.phi());
  const double s = std::sin(a.phi());
  ReverseJacobian2 j;
  j << -c, -s, result.y(),
       s, -c, -result.x(),
       0.0, 0.0, -1.0;
  return j;
}

TailToTail2 tail_to_tail2(const Pose2& a_wi, const Pose2& a_wj) {
  const Pose2 a_iw = inverse2(a_wi);
  const Pose2 value = compose2(a_iw, a_wj);
  const CompoundJacobian2 jc = jac_compose2(a_iw, a_wj, value);
  CompoundJacobian2 j;
  j.leftCols<3>() = jc.leftCols<3>() * jac_inverse2(a_wi, a_iw);
  j.rightCols<3>() = jc.rightCols<3>();
  return {value, j};
}

PointTransform2 transform_point2(const Pose2& pose, const Eigen::Vector2d& p) {
  const double c = std::cos(pose.phi());
  const double s = std::sin(pose.phi());
  PointTransform2 out;
  out.value = {p.x() * c - p.y() * s + pose.x(), p.x() * s + p.y() * c + pose.y()};
  out.d_pose << 1.0, 0.0, -(out.value.y() - pose.y()),
                0.0, 1.0, out.value.x() - pose.x();
  out.d_point << c, -s, s, c;
  return out;
}

PointTransform2 relative_point2(const Pose2& pose, const Eigen::Vector2d& p) {
  const double c = std::cos(pose.phi());
  const double s = std::sin(pose.phi());
  const double dx = p.x() - pose.x();
  const double dy = p.y() - pose.y();
  PointTransform2 out;
  out.value = {c * dx + s * dy, -s * dx + c * dy};
  out.d_pose << -c, -s, out.value.y(),
                s, -c, -out.value.x();
  out.d_point << c, s, -s, c;
  return out;
}

}  // namespace stochmap
