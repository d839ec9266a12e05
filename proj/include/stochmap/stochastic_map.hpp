#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "stochmap/entity.hpp"
#include "stochmap/propagate.hpp"
#include "stochmap/sensor_model.hpp"

namespace stochmap {

struct UpdateDiagnostics {
  Eigen::MatrixXd gain;            // K, state_dim x meas_dim
  Eigen::VectorXd innovation;      // z - h(x̂⁻), angles wrapped
  Eigen::MatrixXd innovation_cov;  // H C Hᵀ + C(v)
  int iterations = 0;
  double mahalanobis_sq = 0.0;     // innovationᵀ S⁻¹ innovation
  bool converged = true;
};

struct GateResult {
  bool accept = false;
  double distance_sq = 0.0;
  double threshold = 0.0;
};

/// Joint estimate of every entity's world location: one mean state vector and
/// the full covariance, cross-covariance blocks included.
///
/// Entity 0 is the anchor: a pose created at the world origin with zero
/// covariance. It is the robot in the usual setting, so it may move.
class StochasticMap {
 public:
  explicit StochasticMap(MapMode mode, std::string anchor_name = "robot");

  /// Rebuilds a map from serialized parts; validates every invariant.
  static StochasticMap from_parts(MapMode mode, std::vector<Entity> entities,
                                  Eigen::VectorXd mean, Eigen::MatrixXd cov);

  MapMode mode() const { return mode_; }
  EntityId anchor() const { return entities_.front().id; }
  const std::vector<Entity>& entities() const { return entities_; }
  const Entity& entity(EntityId id) const;
  std::optional<EntityId> find(std::string_view name) const;
  Eigen::Index dimension() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  Eigen::VectorXd mean_of(EntityId id) const;
  /// C(x_i, x_j).
  Eigen::MatrixXd block(EntityId i, EntityId j) const;
  /// World estimate of one entity.
  Gaussian marginal(EntityId id) const;

  /// State indices covered by `ids`, in order.
  std::vector<Eigen::Index> indices(std::span<const EntityId> ids) const;
  Eigen::VectorXd subvector(std::span<const EntityId> ids) const;

  /// New entity whose world estimate is independent of everything in the map.
  EntityId add_object_world(const Gaussian& prior, EntityKind kind, std::string name = {});

  /// New entity located by a relation `rel` measured in `base`'s frame;
  /// `rel` must be independent of the map. Pose kinds compound with the base,
  /// Point2 entities are transformed into the world by a planar base pose.
  EntityId add_object_relative(EntityId base, const Gaussian& rel, EntityKind kind,
                               std::string name = {});

  /// Moves pose entity `id` by the uncertain relative motion `control`. Only
  /// the entity's row and column of the covariance change.
  void move_entity(EntityId id, const Gaussian& control);

  UpdateDiagnostics ekf_update(const SensorModel& sensor, const Eigen::VectorXd& z);

  /// Iterated EKF: relinearizes about successive estimates, keeping the
  /// original measurement and prior in every step. The first step is the EKF
  /// step; iteration stops once relinearizing moves the estimate by less than
  /// `tol`, or after `max_iter` steps (converged = false).
  UpdateDiagnostics iekf_update(const SensorModel& sensor, const Eigen::VectorXd& z, double tol,
                                int max_iter);

  /// ⊖x_i ⊕ x_j with first-order covariance over the joint (i, j) block.
  Gaussian extract_relation(EntityId i, EntityId j) const;

 private:
  StochasticMap() = default;

  void require_pose(const Entity& e) const;
  void normalize_angles();
  void validate() const;

  MapMode mode_ = MapMode::Planar;
  std::vector<Entity> entities_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

/// extract_relation where an empty id stands for the world frame itself,
/// which is exact: (world, j) is j's marginal and (i, world) is ⊖x_i.
Gaussian extract_relation(const StochasticMap& map, std::optional<EntityId> i,
                          std::optional<EntityId> j);

/// Chi-square gate on the Mahalanobis distance between z and the predicted
/// relation; the innovation covariance is expected.cov + noise_cov.
GateResult mahalanobis_gate(const Gaussian& expected, const Eigen::VectorXd& z,
                            const Eigen::MatrixXd& noise_cov, double p,
                            std::span<const int> angle_components = {});

}  // namespace stochmap
