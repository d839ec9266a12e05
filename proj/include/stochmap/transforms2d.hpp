#pragma once

#include <numbers>

#include <Eigen/Core>

namespace stochmap {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi]; -pi itself maps to +pi.
double normalize_angle(double theta);

/// Planar relationship (x, y, phi) between two frames. phi is kept in (-pi, pi].
class Pose2 {
 public:
  Pose2() = default;
  Pose2(double x, double y, double phi);

  static Pose2 identity() { return {}; }
  static Pose2 from_vector(const Eigen::Ref<const Eigen::VectorXd>& v);

  double x() const { return x_; }
  double y() const { return y_; }
  double phi() const { return phi_; }
  Eigen::Vector3d vector() const { return {x_, y_, phi_}; }

 private:
  double x_ = 0.0;
  double y_ = 0.0;
  double phi_ = 0.0;
};

using CompoundJacobian2 = Eigen::Matrix<double, 3, 6>;
using ReverseJacobian2 = Eigen::Matrix3d;

/// Head-to-tail compounding a ⊕ b.
Pose2 compose2(const Pose2& a, const Pose2& b);

/// Reverse relationship ⊖a.
Pose2 inverse2(const Pose2& a);

/// Jacobian of a ⊕ b with respect to (a, b). The left 3x3 half is the
/// derivative with respect to a, the right half with respect to b.
/// `result` must be compose2(a, b); it is used instead of being recomputed.
CompoundJacobian2 jac_compose2(const Pose2& a, const Pose2& b, const Pose2& result);

/// Jacobian of ⊖a; `result` must be inverse2(a).
ReverseJacobian2 jac_inverse2(const Pose2& a, const Pose2& result);

struct TailToTail2 {
  Pose2 value;
  CompoundJacobian2 jacobian;  // with respect to (a_wi, a_wj)
};

/// ⊖a_wi ⊕ a_wj: frame j expressed in frame i, both given in a common base.
TailToTail2 tail_to_tail2(const Pose2& a_wi, const Pose2& a_wj);

// Point helpers. A planar point carries no orientation, so compounding a pose
// with a point only rotates and translates it.

struct PointTransform2 {
  Eigen::Vector2d value;
  Eigen::Matrix<double, 2, 3> d_pose;
  Eigen::Matrix2d d_point;
};

/// pose ⊕ p for a point p.
PointTransform2 transform_point2(const Pose2& pose, const Eigen::Vector2d& p);

/// ⊖pose ⊕ p: the point p expressed in pose's frame.
PointTransform2 relative_point2(const Pose2& pose, const Eigen::Vector2d& p);

}  // namespace stochmap
