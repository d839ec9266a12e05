#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "stochmap/entity.hpp"

namespace stochmap {

/// Noise covariance used in place of an exact (singular) constraint.
inline constexpr double kDefaultNoiseFloor = 1e-10;

/// cov + noise_floor * I when cov's smallest eigenvalue is below noise_floor.
Eigen::MatrixXd floored_noise(const Eigen::MatrixXd& cov, double noise_floor = kDefaultNoiseFloor);

/// Measurement model z = h(x) + v over a subset of map entities. h and its
/// Jacobian act on the concatenated state of `touched` entities, in order;
/// the rest of the state vector contributes zero columns.
class SensorModel {
 public:
  using Function = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using JacobianFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

  /// `noise_cov` must be symmetric PSD. If its smallest eigenvalue is below
  /// `noise_floor`, noise_floor * I is added so the innovation stays invertible.
  SensorModel(std::vector<EntityId> touched, std::vector<Eigen::Index> block_dims, Function h,
              JacobianFunction jacobian, Eigen::MatrixXd noise_cov,
              std::vector<int> angle_components = {}, double noise_floor = kDefaultNoiseFloor);

  const std::vector<EntityId>& touched() const { return touched_; }
  const std::vector<Eigen::Index>& block_dims() const { return block_dims_; }
  Eigen::Index state_dim() const { return state_dim_; }
  Eigen::Index meas_dim() const { return noise_cov_.rows(); }
  const Eigen::MatrixXd& noise_cov() const { return noise_cov_; }
  const std::vector<int>& angle_components() const { return angle_components_; }

  Eigen::VectorXd evaluate(const Eigen::VectorXd& sub_state) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& sub_state) const;

  /// z - h with angle components wrapped.
  Eigen::VectorXd residual(const Eigen::VectorXd& z, const Eigen::VectorXd& h) const;

 private:
  std::vector<EntityId> touched_;
  std::vector<Eigen::Index> block_dims_;
  Eigen::Index state_dim_ = 0;
  Function h_;
  JacobianFunction jacobian_;
  Eigen::MatrixXd noise_cov_;
  std::vector<int> angle_components_;
};

}  // namespace stochmap
