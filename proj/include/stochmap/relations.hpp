#pragma once

#include <Eigen/Core>

#include "stochmap/entity.hpp"

namespace stochmap {

/// Value of a two-argument relation and its partial derivatives.
struct Relation {
  Eigen::VectorXd value;
  Eigen::MatrixXd d_first;
  Eigen::MatrixXd d_second;
};

/// first ⊕ second, where `first` is a pose of the map's mode and `second` is
/// a pose of the same kind or (planar only) a Point2.
Relation compound_relation(MapMode mode, EntityKind second_kind, const Eigen::VectorXd& first,
                           const Eigen::VectorXd& second);

/// ⊖first ⊕ second: `second` expressed in the frame of `first`.
Relation tail_to_tail_relation(MapMode mode, EntityKind second_kind, const Eigen::VectorXd& first,
                               const Eigen::VectorXd& second);

}  // namespace stochmap

namespace stochmap {

/// Values only; no Jacobian, so no singularity check.
Eigen::VectorXd compound_value(MapMode mode, EntityKind second_kind, const Eigen::VectorXd& first,
                               const Eigen::VectorXd& second);
Eigen::VectorXd tail_to_tail_value(MapMode mode, EntityKind second_kind,
                                   const Eigen::VectorXd& first, const Eigen::VectorXd& second);

}  // namespace stochmap
