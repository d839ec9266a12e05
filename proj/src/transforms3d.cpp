#include "stochmap/transforms3d.hpp"

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "stochmap/error.hpp"
#include "stochmap/propagate.hpp"
#include "stochmap/transforms2d.hpp"

namespace stochmap {
namespace {

void require_same_convention(const Pose3& a, const Pose3& b) {
  if (a.convention() != b.convention()) {
    throw Error(ErrorKind::ConventionMismatch, "poses use different angle conventions");
  }
}

void require_margin(const Pose3& p, const char* what) {
  if (singularity_margin(p) < kSingularityRejectMargin) {
    throw Error(ErrorKind::SingularOrientation, what);
  }
}

}  // namespace

Pose3::Pose3(AngleConvention convention) : convention_(convention) {}

Pose3::Pose3(double x, double y, double z, double phi, double theta, double psi,
             AngleConvention convention)
    : t_(x, y, z),
      angles_(normalize_angle(phi), normalize_angle(theta), normalize_angle(psi)),
      convention_(convention) {
  if (!t_.allFinite()) {
    throw Error(ErrorKind::InvalidValue, "pose translation is not finite");
  }
}

Pose3 Pose3::from_vector(const Eigen::Ref<const Eigen::VectorXd>& v, AngleConvention convention) {
  if (v.size() != 6) {
    throw Error(ErrorKind::ShapeMismatch, "Pose3 needs 6 components");
  }
  return {v(0), v(1), v(2), v(3), v(4), v(5), convention};
}

Eigen::Matrix<double, 6, 1> Pose3::vector() const {
  Eigen::Matrix<double, 6, 1> v;
  v << t_, angles_;
  return v;
}

Rot3 Rot3::from_matrix(const Eigen::Matrix3d& m) {
  if (!m.allFinite() ||
      (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(m.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidValue, "matrix is not a proper rotation");
  }
  return Rot3(m, 0);
}

Rot3 rot_of_pose(const Pose3& p) {
  const double cf = std::cos(p.phi()), sf = std::sin(p.phi());
  const double ct = std::cos(p.theta()), st = std::sin(p.theta());
  const double cp = std::cos(p.psi()), sp = std::sin(p.psi());
  Eigen::Matrix3d m;
  if (p.convention() == AngleConvention::Euler) {
    m << cf * ct * cp - sf * sp, -cf * ct * sp - sf * cp, cf * st,
         sf * ct * cp + cf * sp, -sf * ct * sp + cf * cp, sf * st,
         -st * cp, st * sp, ct;
  } else {
    m << cf * ct, cf * st * sp - sf * cp, cf * st * cp + sf * sp,
         sf * ct, sf * st * sp + cf * cp, sf * st * cp - cf * sp,
         -st, ct * sp, ct * cp;
  }
  return Rot3::from_matrix(m);
}

Eigen::Vector3d angles_of_rotation(const Rot3& rot, AngleConvention convention) {
  const Eigen::Matrix3d& r = rot.matrix();
  constexpr double kGimbal = 1e-12;
  double phi = 0.0;
  Eigen::Vector3d out;
  if (convention == AngleConvention::Euler) {
    // a = third column = (cos phi sin theta, sin phi sin theta, cos theta)
    if (std::hypot(r(0, 2), r(1, 2)) > kGimbal) phi = std::atan2(r(1, 2), r(0, 2));
    const double cf = std::cos(phi), sf = std::sin(phi);
    out << phi, std::atan2(r(0, 2) * cf + r(1, 2) * sf, r(2, 2)),
        std::atan2(-r(0, 0) * sf + r(1, 0) * cf, -r(0, 1) * sf + r(1, 1) * cf);
  } else {
    // n = first column = (cos phi cos theta, sin phi cos theta, -sin theta)
    if (std::hypot(r(0, 0), r(1, 0)) > kGimbal) phi = std::atan2(r(1, 0), r(0, 0));
    const double cf = std::cos(phi), sf = std::sin(phi);
    out << phi, std::atan2(-r(2, 0), r(0, 0) * cf + r(1, 0) * sf),
        std::atan2(r(0, 2) * sf - r(1, 2) * cf, -r(0, 1) * sf + r(1, 1) * cf);
  }
  return out;
}

double singularity_margin(const Pose3& p) {
  return p.convention() == AngleConvention::Euler ? std::abs(std::sin(p.theta()))
                                                  : std::abs(std::cos(p.theta()));
}

Pose3 compose3(const Pose3& a, const Pose3& b) {
  require_same_convention(a, b);
  const Rot3 ra = rot_of_pose(a);
  const Eigen::Vector3d t = ra * b.translation() + a.translation();
  const Eigen::Vector3d ang = angles_of_rotation(ra * rot_of_pose(b), a.convention());
  return {t.x(), t.y(), t.z(), ang(0), ang(1), ang(2), a.convention()};
}

Pose3 inverse3(const Pose3& p) {
  const Rot3 r = rot_of_pose(p);
  const Eigen::Vector3d t = -(r.transpose() * p.translation());
  if (p.convention() == AngleConvention::Euler) {
    return {t.x(), t.y(), t.z(), -p.psi(), -p.theta(), -p.phi(), p.convention()};
  }
  const Eigen::Vector3d ang = angles_of_rotation(r.transpose(), p.convention());
  return {t.x(), t.y(), t.z(), ang(0), ang(1), ang(2), p.convention()};
}

CompoundJacobian3 jac_compose3(const Pose3& a, const Pose3& b, const Pose3& result) {
  require_same_convention(a, b);
  require_same_convention(a, result);
  require_margin(result, "compound orientation is at a parameterization singularity");

  const Eigen::Matrix3d r1 = rot_of_pose(a).matrix();
  const Eigen::Vector3d d = result.translation() - a.translation();
  const Eigen::Vector3d& t2 = b.translation();
  const double f1 = a.phi(), th1 = a.theta();
  const double th2 = b.theta(), p2 = b.psi();
  const double f3 = result.phi(), th3 = result.theta(), p3 = result.psi();
  const double cf1 = std::cos(f1), sf1 = std::sin(f1);
  const double cdf = std::cos(f3 - f1), sdf = std::sin(f3 - f1);
  const double cdp = std::cos(p3 - p2), sdp = std::sin(p3 - p2);

  Eigen::Matrix3d m;
  m.col(0) << -d.y(), d.x(), 0.0;
  m.col(1) << d.z() * cf1, d.z() * sf1, -(cf1 * d.x() + sf1 * d.y());

  Eigen::Matrix3d k1;
  Eigen::Matrix3d k2;
  if (a.convention() == AngleConvention::Euler) {
    m.col(2) = r1.col(1) * t2.x() - r1.col(0) * t2.y();
    const double s3 = std::sin(th3), c3 = std::cos(th3);
    const double s1 = std::sin(th1), c1 = std::cos(th1);
    const double s2 = std::sin(th2), c2 = std::cos(th2);
    k1 << 1.0, -c3 * sdf / s3, c1 - c3 * s1 * cdf / s3,
          0.0, cdf, -s1 * sdf,
          0.0, sdf / s3, s1 * cdf / s3;
    k2 << s2 * cdp / s3, sdp / s3, 0.0,
          -s2 * sdp, cdp, 0.0,
          c2 - c3 * s2 * cdp / s3, -c3 * sdp / s3, 1.0;
  } else {
    m.col(2) = r1.col(2) * t2.y() - r1.col(1) * t2.z();
    const double s3 = std::sin(th3), c3 = std::cos(th3);
    const double s1 = std::sin(th1), c1 = std::cos(th1);
    const double s2 = std::sin(th2), c2 = std::cos(th2);
    k1 << 1.0, s3 * sdf / c3, s3 * c1 * cdf / c3 - s1,
          0.0, cdf, -c1 * sdf,
          0.0, sdf / c3, c1 * cdf / c3;
    k2 << c2 * cdp / c3, sdp / c3, 0.0,
          -c2 * sdp, cdp, 0.0,
          s3 * c2 * cdp / c3 - s2, s3 * sdp / c3, 1.0;
  }

  CompoundJacobian3 j = CompoundJacobian3::Zero();
  j.block<3, 3>(0, 0).setIdentity();
  j.block<3, 3>(0, 3) = m;
  j.block<3, 3>(0, 6) = r1;
  j.block<3, 3>(3, 3) = k1;
  j.block<3, 3>(3, 9) = k2;
  return j;
}

ReverseJacobian3 jac_inverse3(const Pose3& p, const Pose3& result) {
  require_same_convention(p, result);
  ReverseJacobian3 j = ReverseJacobian3::Zero();
  if (p.convention() == AngleConvention::Rpy) {
    require_margin(result, "reversed orientation is at a parameterization singularity");
    const AngleConvention conv = p.convention();
    const VectorFunction f = [conv](const Eigen::VectorXd& v) -> Eigen::VectorXd {
      return inverse3(Pose3::from_vector(v, conv)).vector();
    };
    const std::array<int, 3> angle_outputs{3, 4, 5};
    j = finite_difference_jacobian(f, p.vector(), angle_outputs);
    return j;
  }

  const Eigen::Matrix3d r = rot_of_pose(p).matrix();
  const Eigen::Vector3d& t = p.translation();
  const double cf = std::cos(p.phi()), sf = std::sin(p.phi());
  const Eigen::Vector3d about_z(-t.y(), t.x(), 0.0);
  const Eigen::Vector3d about_node(cf * t.z(), sf * t.z(), -(cf * t.x() + sf * t.y()));
  const Eigen::Vector3d back = r.transpose() * t;

  Eigen::Matrix3d n;
  n.col(0) = r.transpose() * about_z;
  n.col(1) = r.transpose() * about_node;
  n.col(2) << -back.y(), back.x(), 0.0;

  Eigen::Matrix3d q;
  q << 0.0, 0.0, -1.0,
       0.0, -1.0, 0.0,
       -1.0, 0.0, 0.0;
  j.block<3, 3>(0, 0) = -r.transpose();
  j.block<3, 3>(0, 3) = n;
  j.block<3, 3>(3, 3) = q;
  return j;
}

TailToTail3 tail_to_tail3(const Pose3& a_wi, const Pose3& a_wj) {
  require_same_convention(a_wi, a_wj);
  const Pose3 a_iw = inverse3(a_wi);
  const Pose3 value = compose3(a_iw, a_wj);
  const CompoundJacobian3 jc = jac_compose3(a_iw, a_wj, value);
  CompoundJacobian3 j;
  j.leftCols<6>() = jc.leftCols<6>() * jac_inverse3(a_wi, a_iw);
  j.rightCols<6>() = jc.rightCols<6>();
  return {value, j};
}

}  // namespace stochmap
