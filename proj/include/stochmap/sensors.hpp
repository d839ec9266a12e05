#pragma once

#include <vector>

#include <Eigen/Core>

#include "stochmap/propagate.hpp"
#include "stochmap/sensor_model.hpp"
#include "stochmap/stochastic_map.hpp"

namespace stochmap {

/// Measures entity j in the frame of pose i: z = ⊖x_i ⊕ x_j. j may be a pose
/// of the map's mode or, in planar maps, a Point2.
SensorModel relative_pose_sensor(const StochasticMap& map, EntityId i, EntityId j,
                                 const Eigen::MatrixXd& noise_cov,
                                 double noise_floor = kDefaultNoiseFloor);

/// Rectangularity of four Point2 corners labeled counter-clockwise from the
/// lower-right one. Zero for an exact rectangle.
SensorModel rectangle_sensor(const StochasticMap& map, EntityId i, EntityId j, EntityId k,
                             EntityId l, const Eigen::MatrixXd& noise_cov,
                             double noise_floor = kDefaultNoiseFloor);

/// z = H x_sub over the given entities.
SensorModel linear_sensor(const StochasticMap& map, std::vector<EntityId> touched,
                          const Eigen::MatrixXd& h, const Eigen::MatrixXd& noise_cov,
                          double noise_floor = kDefaultNoiseFloor);

Eigen::Vector3d rectangle_residual(const Eigen::Vector2d& pi, const Eigen::Vector2d& pj,
                                   const Eigen::Vector2d& pk, const Eigen::Vector2d& pl);

/// h at the current estimate, with H C Hᵀ + C(v).
Gaussian predict_measurement(const StochasticMap& map, const SensorModel& sensor);

}  // namespace stochmap
