#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "stochmap/propagate.hpp"
#include "stochmap/random.hpp"
#include "stochmap/transforms2d.hpp"
#include "stochmap/transforms3d.hpp"

namespace testing {

using namespace stochmap;

inline Pose2 random_pose2(std::mt19937_64& gen, double span = 10.0) {
  std::uniform_real_distribution<double> t(-span, span);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  return {t(gen), t(gen), a(gen)};
}

/// Pose with singularity margin above `margin`.
inline Pose3 random_pose3(std::mt19937_64& gen, AngleConvention conv, double margin = 0.2,
                          double span = 10.0) {
  std::uniform_real_distribution<double> t(-span, span);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (;;) {
    Pose3 p(t(gen), t(gen), t(gen), a(gen), a(gen), a(gen), conv);
    if (singularity_margin(p) > margin) return p;
  }
}

inline Eigen::Vector3d homogeneous_to_pose(const Eigen::Matrix3d& h) {
  return {h(0, 2), h(1, 2), std::atan2(h(1, 0), h(0, 0))};
}

inline Eigen::Matrix3d pose_to_homogeneous(const Pose2& p) {
  Eigen::Matrix3d h;
  h << std::cos(p.phi()), -std::sin(p.phi()), p.x(), std::sin(p.phi()), std::cos(p.phi()), p.y(),
      0, 0, 1;
  return h;
}

inline Eigen::Matrix3d rot_z(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}
inline Eigen::Matrix3d rot_y(double a) {
  Eigen::Matrix3d r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}
inline Eigen::Matrix3d rot_x(double a) {
  Eigen::Matrix3d r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

inline Eigen::Matrix3d primitive_rotation(const Pose3& p) {
  const Eigen::Matrix3d last =
      p.convention() == AngleConvention::Euler ? rot_z(p.psi()) : rot_x(p.psi());
  return rot_z(p.phi()) * rot_y(p.theta()) * last;
}

inline Eigen::Matrix4d homogeneous(const Pose3& p) {
  Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
  h.topLeftCorner<3, 3>() = primitive_rotation(p);
  h.topRightCorner<3, 1>() = p.translation();
  return h;
}

inline double angle_diff(double a, double b) { return std::abs(normalize_angle(a - b)); }

/// Largest difference between two pose vectors, angles compared modulo 2π.
inline double pose_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            std::vector<int> angles) {
  Eigen::VectorXd d = a - b;
  for (int k : angles) d(k) = normalize_angle(d(k));
  return d.cwiseAbs().maxCoeff();
}

/// Sample moments with standard errors of each mean and covariance entry.
struct SampleMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  Eigen::VectorXd mean_se;
  Eigen::MatrixXd cov_se;
};

inline SampleMoments sample_moments(const std::vector<Eigen::VectorXd>& xs) {
  const auto n = static_cast<double>(xs.size());
  const Eigen::Index d = xs.front().size();
  SampleMoments m;
  m.mean = Eigen::VectorXd::Zero(d);
  for (const auto& x : xs) m.mean += x;
  m.mean /= n;
  m.cov = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(d, d);
  for (const auto& x : xs) {
    const Eigen::VectorXd c = x - m.mean;
    const Eigen::MatrixXd p = c * c.transpose();
    m.cov += p;
    sq += p.cwiseProduct(p);
  }
  m.cov /= n;
  m.cov_se = ((sq / n - m.cov.cwiseProduct(m.cov)) / n).cwiseMax(0.0).cwiseSqrt();
  m.mean_se = (m.cov.diagonal() / n).cwiseSqrt();
  return m;
}

}  // namespace testing
