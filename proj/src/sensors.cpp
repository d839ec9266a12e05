#include "stochmap/sensors.hpp"

#include <algorithm>
#include <array>

#include "stochmap/error.hpp"
#include "stochmap/relations.hpp"

namespace stochmap {

SensorModel relative_pose_sensor(const StochasticMap& map, EntityId i, EntityId j,
                                 const Eigen::MatrixXd& noise_cov, double noise_floor) {
  const Entity& a = map.entity(i);
  const Entity& b = map.entity(j);
  if (i == j) {
    throw Error(ErrorKind::InvalidValue, "a relative sensor needs two distinct entities");
  }
  if (a.kind != pose_kind(map.mode())) {
    throw Error(ErrorKind::KindMismatch, "observing entity '" + a.name + "' is not a pose");
  }
  const MapMode mode = map.mode();
  const EntityKind target = b.kind;
  const Eigen::Index da = a.dimension();
  const Eigen::Index db = b.dimension();
  if (noise_cov.rows() != db || noise_cov.cols() != db) {
    throw Error(ErrorKind::ShapeMismatch, "noise covariance must match the measured entity");
  }
  // rejects unsupported target kinds now rather than at evaluation
  tail_to_tail_relation(mode, target, map.mean_of(i), map.mean_of(j));

  auto h = [=](const Eigen::VectorXd& s) -> Eigen::VectorXd {
    return tail_to_tail_relation(mode, target, s.head(da), s.tail(db)).value;
  };
  auto jac = [=](const Eigen::VectorXd& s) -> Eigen::MatrixXd {
    const Relation r = tail_to_tail_relation(mode, target, s.head(da), s.tail(db));
    Eigen::MatrixXd out(r.value.size(), da + db);
    out << r.d_first, r.d_second;
    return out;
  };
  return SensorModel({i, j}, {da, db}, h, jac, noise_cov, kind_angle_components(target),
                     noise_floor);
}

Eigen::Vector3d rectangle_residual(const Eigen::Vector2d& pi, const Eigen::Vector2d& pj,
                                   const Eigen::Vector2d& pk, const Eigen::Vector2d& pl) {
  const Eigen::Vector2d par = pi - pj + pk - pl;
  return {par.x(), par.y(), (pi - pj).dot(pk - pj)};
}

SensorModel rectangle_sensor(const StochasticMap& map, EntityId i, EntityId j, EntityId k,
                             EntityId l, const Eigen::MatrixXd& noise_cov, double noise_floor) {
  const std::array<EntityId, 4> ids{i, j, k, l};
  for (EntityId id : ids) {
    if (map.entity(id).kind != EntityKind::Point2) {
      throw Error(ErrorKind::KindMismatch, "rectangle corners must be Point2 entities");
    }
  }
  if (noise_cov.rows() != 3 || noise_cov.cols() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "rectangle noise covariance must be 3x3");
  }
  auto h = [](const Eigen::VectorXd& s) -> Eigen::VectorXd {
    return rectangle_residual(s.segment<2>(0), s.segment<2>(2), s.segment<2>(4),
                              s.segment<2>(6));
  };
  auto jac = [](const Eigen::VectorXd& s) -> Eigen::MatrixXd {
    const Eigen::Vector2d a = s.segment<2>(0) - s.segment<2>(2);
    const Eigen::Vector2d b = s.segment<2>(4) - s.segment<2>(2);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3, 8);
    for (int c = 0; c < 2; ++c) {
      out(c, c) = 1.0;
      out(c, 2 + c) = -1.0;
      out(c, 4 + c) = 1.0;
      out(c, 6 + c) = -1.0;
    }
    out.block<1, 2>(2, 0) = b.transpose();
    out.block<1, 2>(2, 2) = -(a + b).transpose();
    out.block<1, 2>(2, 4) = a.transpose();
    return out;
  };
  return SensorModel({ids.begin(), ids.end()}, {2, 2, 2, 2}, h, jac, noise_cov, {}, noise_floor);
}

SensorModel linear_sensor(const StochasticMap& map, std::vector<EntityId> touched,
                          const Eigen::MatrixXd& h, const Eigen::MatrixXd& noise_cov,
                          double noise_floor) {
  std::vector<Eigen::Index> dims;
  Eigen::Index total = 0;
  for (EntityId id : touched) {
    dims.push_back(map.entity(id).dimension());
    total += dims.back();
  }
  if (h.cols() != total || h.rows() != noise_cov.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "linear sensor matrix does not conform");
  }
  auto f = [h](const Eigen::VectorXd& s) -> Eigen::VectorXd { return h * s; };
  auto jac = [h](const Eigen::VectorXd&) -> Eigen::MatrixXd { return h; };
  return SensorModel(std::move(touched), std::move(dims), f, jac, noise_cov, {}, noise_floor);
}

Gaussian predict_measurement(const StochasticMap& map, const SensorModel& sensor) {
  const std::vector<Eigen::Index> idx = map.indices(sensor.touched());
  const Eigen::VectorXd sub = map.mean()(idx);
  const Eigen::MatrixXd h = sensor.jacobian(sub);
  const Eigen::MatrixXd c = map.covariance()(idx, idx);
  return {sensor.evaluate(sub), h * c * h.transpose() + sensor.noise_cov()};
}

}  // namespace stochmap
