#include "stochmap/sensor_model.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

#include "stochmap/error.hpp"
#include "stochmap/propagate.hpp"
#include "stochmap/transforms2d.hpp"

namespace stochmap {

Eigen::MatrixXd floored_noise(const Eigen::MatrixXd& cov, double noise_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < noise_floor) {
    return cov + noise_floor * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
  }
  return cov;
}

SensorModel::SensorModel(std::vector<EntityId> touched, std::vector<Eigen::Index> block_dims,
                         Function h, JacobianFunction jacobian, Eigen::MatrixXd noise_cov,
                         std::vector<int> angle_components, double noise_floor)
    : touched_(std::move(touched)),
      block_dims_(std::move(block_dims)),
      h_(std::move(h)),
      jacobian_(std::move(jacobian)),
      noise_cov_(std::move(noise_cov)),
      angle_components_(std::move(angle_components)) {
  if (touched_.empty() || touched_.size() != block_dims_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "sensor needs one block dimension per entity");
  }
  if (std::set<EntityId>(touched_.begin(), touched_.end()).size() != touched_.size()) {
    throw Error(ErrorKind::DuplicateEntity, "sensor touches an entity twice");
  }
  for (Eigen::Index d : block_dims_) state_dim_ += d;
  if (!h_ || !jacobian_) {
    throw Error(ErrorKind::InvalidValue, "sensor function is empty");
  }
  check_covariance(noise_cov_);
  noise_cov_ = symmetrized(noise_cov_);
  if (noise_cov_.rows() == 0) {
    throw Error(ErrorKind::ShapeMismatch, "sensor has no measurement components");
  }
  for (int i : angle_components_) {
    if (i < 0 || i >= noise_cov_.rows()) {
      throw Error(ErrorKind::ShapeMismatch, "angle component index out of range");
    }
  }
  noise_cov_ = floored_noise(noise_cov_, noise_floor);
}

Eigen::VectorXd SensorModel::evaluate(const Eigen::VectorXd& sub_state) const {
  if (sub_state.size() != state_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "sensor state has the wrong size");
  }
  Eigen::VectorXd z = h_(sub_state);
  if (z.size() != meas_dim()) {
    throw Error(ErrorKind::ShapeMismatch, "sensor output has the wrong size");
  }
  if (!z.allFinite()) {
    throw Error(ErrorKind::NumericalFailure, "sensor output is not finite");
  }
  return z;
}

Eigen::MatrixXd SensorModel::jacobian(const Eigen::VectorXd& sub_state) const {
  if (sub_state.size() != state_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "sensor state has the wrong size");
  }
  Eigen::MatrixXd j = jacobian_(sub_state);
  if (j.rows() != meas_dim() || j.cols() != state_dim_) {
    throw Error(ErrorKind::ShapeMismatch, "sensor Jacobian has the wrong shape");
  }
  if (!j.allFinite()) {
    throw Error(ErrorKind::NumericalFailure, "sensor Jacobian is not finite");
  }
  return j;
}

Eigen::VectorXd SensorModel::residual(const Eigen::VectorXd& z, const Eigen::VectorXd& h) const {
  if (z.size() != meas_dim() || h.size() != meas_dim()) {
    throw Error(ErrorKind::ShapeMismatch, "measurement has the wrong size");
  }
  Eigen::VectorXd r = z - h;
  for (int i : angle_components_) r(i) = normalize_angle(r(i));
  return r;
}

}  // namespace stochmap
