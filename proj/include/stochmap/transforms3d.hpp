#pragma once

#include <Eigen/Core>

namespace stochmap {

/// Orientation parameterization of a 6-DOF relationship:
/// Euler = Rot(z, phi) Rot(y', theta) Rot(z'', psi),
/// Rpy   = Rot(z, phi) Rot(y', theta) Rot(x'', psi).
enum class AngleConvention { Euler, Rpy };

/// Below this margin Jacobians are not evaluated.
inline constexpr double kSingularityRejectMargin = 1e-6;
/// Below this margin covariance estimates are flagged as unreliable.
inline constexpr double kSingularityWarnMargin = 0.05;

class Pose3 {
 public:
  Pose3() = default;
  explicit Pose3(AngleConvention convention);
  Pose3(double x, double y, double z, double phi, double theta, double psi,
        AngleConvention convention);

  /// v = (x, y, z, phi, theta, psi).
  static Pose3 from_vector(const Eigen::Ref<const Eigen::VectorXd>& v,
                           AngleConvention convention);

  const Eigen::Vector3d& translation() const { return t_; }
  double phi() const { return angles_(0); }
  double theta() const { return angles_(1); }
  double psi() const { return angles_(2); }
  const Eigen::Vector3d& angles() const { return angles_; }
  AngleConvention convention() const { return convention_; }
  Eigen::Matrix<double, 6, 1> vector() const;

 private:
  Eigen::Vector3d t_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d angles_ = Eigen::Vector3d::Zero();
  AngleConvention convention_ = AngleConvention::Euler;
};

/// Proper rotation matrix. Columns are usually called n, o, a.
class Rot3 {
 public:
  Rot3() : m_(Eigen::Matrix3d::Identity()) {}

  /// Throws InvalidValue unless m is orthonormal with det +1 (within 1e-9).
  static Rot3 from_matrix(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Rot3 transpose() const { return Rot3(m_.transpose(), 0); }
  Rot3 operator*(const Rot3& other) const { return Rot3(m_ * other.m_, 0); }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }

 private:
  Rot3(const Eigen::Matrix3d& m, int) : m_(m) {}
  Eigen::Matrix3d m_;
};

Rot3 rot_of_pose(const Pose3& p);

/// Angles of r in the given convention, theta in [0, pi] (Euler) or
/// [-pi/2, pi/2] (Rpy). At the singular configuration phi is set to 0.
Eigen::Vector3d angles_of_rotation(const Rot3& r, AngleConvention convention);

/// |sin theta| for Euler, |cos theta| for Rpy.
double singularity_margin(const Pose3& p);

/// Head-to-tail compounding; throws ConventionMismatch on mixed conventions.
Pose3 compose3(const Pose3& a, const Pose3& b);

/// Reverse relationship. Euler angles map to (-psi, -theta, -phi); Rpy angles
/// are re-extracted from the transposed rotation.
Pose3 inverse3(const Pose3& p);

using CompoundJacobian3 = Eigen::Matrix<double, 6, 12>;
using ReverseJacobian3 = Eigen::Matrix<double, 6, 6>;

/// Jacobian of a ⊕ b w.r.t. (a, b), evaluated with the already computed result.
/// Throws SingularOrientation when singularity_margin(result) < kSingularityRejectMargin.
CompoundJacobian3 jac_compose3(const Pose3& a, const Pose3& b, const Pose3& result);

/// Jacobian of ⊖p; `result` must be inverse3(p). Closed form for Euler,
/// central differences for Rpy (which throws SingularOrientation near theta = ±pi/2).
ReverseJacobian3 jac_inverse3(const Pose3& p, const Pose3& result);

struct TailToTail3 {
  Pose3 value;
  CompoundJacobian3 jacobian;
};

TailToTail3 tail_to_tail3(const Pose3& a_wi, const Pose3& a_wj);

}  // namespace stochmap
