#include <array>

#include <Eigen/Cholesky>

#include "doctest.h"
#include "stochmap/error.hpp"
#include "stochmap/sensors.hpp"
#include "support.hpp"

using namespace stochmap;
using namespace testing;

namespace {

Eigen::MatrixXd eye(int n, double s) { return s * Eigen::MatrixXd::Identity(n, n); }

struct Corners {
  StochasticMap map{MapMode::Planar};
  std::array<EntityId, 4> ids;
};

Corners corners(const std::array<Eigen::Vector2d, 4>& p, double var) {
  Corners c;
  for (int k = 0; k < 4; ++k) {
    c.ids[k] = c.map.add_object_world(Gaussian(p[k], eye(2, var)), EntityKind::Point2);
  }
  return c;
}

const std::array<Eigen::Vector2d, 4> kUnitSquare{Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1),
                                                  Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0)};

}  // namespace

TEST_CASE("relative_pose_sensor") {
  StochasticMap m(MapMode::Planar);
  const EntityId o = m.add_object_world(Gaussian(Eigen::Vector3d(1, 2, 0.4), eye(3, 0.1)), EntityKind::Pose2);
  CHECK_THROWS_AS(relative_pose_sensor(m, o, o, eye(3, 0.1)), Error);
  const SensorModel s = relative_pose_sensor(m, m.anchor(), o, eye(3, 0.1));
  CHECK((predict_measurement(m, s).mean() - m.mean_of(o)).norm() < 1e-15);
  CHECK(s.meas_dim() == 3);
  const EntityId p = m.add_object_world(Gaussian(Eigen::Vector2d(1, 2), eye(2, 0.1)), EntityKind::Point2);
  CHECK_THROWS_AS(relative_pose_sensor(m, p, o, eye(3, 0.1)), Error);
  CHECK(relative_pose_sensor(m, o, p, eye(2, 0.1)).angle_components().empty());
  CHECK_THROWS_AS(relative_pose_sensor(m, o, p, eye(3, 0.1)), Error);
}

TEST_CASE("relative sensors match finite differences") {
  std::mt19937_64 gen(51);
  for (int k = 0; k < 200; ++k) {
    StochasticMap m(MapMode::Planar);
    const Pose2 a = random_pose2(gen), b = random_pose2(gen);
    const EntityId i = m.add_object_world(Gaussian::exact(a.vector()), EntityKind::Pose2);
    const EntityId j = m.add_object_world(Gaussian::exact(b.vector()), EntityKind::Pose2);
    const EntityId q = m.add_object_world(Gaussian::exact(b.vector().head<2>()), EntityKind::Point2);
    for (EntityId target : {j, q}) {
      const Eigen::Index d = m.entity(target).dimension();
      const SensorModel s = relative_pose_sensor(m, i, target, eye(static_cast<int>(d), 0.01));
      const std::array<EntityId, 2> ids{i, target};
      const Eigen::VectorXd x = m.subvector(ids);
      auto h = [&](const Eigen::VectorXd& v) { return s.evaluate(v); };
      REQUIRE((finite_difference_jacobian(h, x, s.angle_components()) - s.jacobian(x))
                  .cwiseAbs()
                  .maxCoeff() < 1e-6);
    }
    const SensorModel s = relative_pose_sensor(m, i, j, eye(3, 0.01));
    const std::array<EntityId, 2> ids{i, j};
    REQUIRE((s.evaluate(m.subvector(ids)) - tail_to_tail2(a, b).value.vector()).norm() == 0.0);
  }
}

TEST_CASE("rectangle sensor") {
  CHECK(rectangle_residual(kUnitSquare[0], kUnitSquare[1], kUnitSquare[2], kUnitSquare[3]).norm() == 0.0);
  const Eigen::Vector3d bumped = rectangle_residual(kUnitSquare[0] + Eigen::Vector2d(0.1, 0),
                                                    kUnitSquare[1], kUnitSquare[2], kUnitSquare[3]);
  CHECK(std::abs(std::abs(bumped(0)) - 0.1) < 1e-15);
  CHECK(bumped(1) == 0.0);
  CHECK(bumped(2) != 0.0);

  Corners c = corners(kUnitSquare, 0.0);
  const SensorModel s = rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[2], c.ids[3], eye(3, 1e-4));
  const Gaussian pred = predict_measurement(c.map, s);
  CHECK(pred.mean().norm() == 0.0);
  CHECK((pred.cov() - eye(3, 1e-4)).norm() == 0.0);
  CHECK_THROWS_AS(rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[1], c.ids[3], eye(3, 1e-4)), Error);
  try {
    rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[1], c.ids[3], eye(3, 1e-4));
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DuplicateEntity);
  }
  CHECK_THROWS_AS(rectangle_sensor(c.map, c.map.anchor(), c.ids[1], c.ids[2], c.ids[3], eye(3, 1e-4)), Error);

  std::mt19937_64 gen(52);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd x(8);
    for (int i = 0; i < 8; ++i) x(i) = u(gen);
    auto h = [&](const Eigen::VectorXd& v) { return s.evaluate(v); };
    REQUIRE((finite_difference_jacobian(h, x) - s.jacobian(x)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("noise floor") {
  Corners c = corners(kUnitSquare, 0.01);
  const SensorModel s = rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[2], c.ids[3], eye(3, 0.0));
  CHECK((s.noise_cov() - eye(3, kDefaultNoiseFloor)).norm() == 0.0);
  const SensorModel loose = rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[2], c.ids[3], eye(3, 0.5));
  CHECK((loose.noise_cov() - eye(3, 0.5)).norm() == 0.0);
  Eigen::Matrix3d asym = eye(3, 1.0);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[2], c.ids[3], asym), Error);
}

TEST_CASE("predict_measurement against Monte Carlo") {
  StochasticMap m(MapMode::Planar);
  const EntityId r = m.anchor();
  m.move_entity(r, Gaussian(Eigen::Vector3d(1, 0.5, 0.3), eye(3, 0.004)));
  const EntityId o = m.add_object_relative(r, Gaussian(Eigen::Vector3d(2, 1, -0.2), eye(3, 0.003)),
                                           EntityKind::Pose2);
  m.move_entity(r, Gaussian(Eigen::Vector3d(0.5, 0.2, 0.1), eye(3, 0.002)));
  const SensorModel s = relative_pose_sensor(m, r, o, eye(3, 0.001));
  const Gaussian pred = predict_measurement(m, s);
  CHECK((pred.cov() - pred.cov().transpose()).norm() == 0.0);
  CHECK(pred.cov().selfadjointView<Eigen::Lower>().llt().info() == Eigen::Success);

  const std::array<EntityId, 2> ids{r, o};
  const std::vector<Eigen::Index> idx = m.indices(ids);
  const Eigen::MatrixXd l = covariance_factor(m.covariance()(idx, idx));
  const Eigen::MatrixXd lv = covariance_factor(s.noise_cov());
  const Eigen::VectorXd mean = m.mean()(idx);
  CounterRng rng(53, 0);
  std::vector<Eigen::VectorXd> zs;
  for (int k = 0; k < 1'000'000; ++k) {
    Eigen::VectorXd z = s.evaluate(rng.gaussian(mean, l)) + rng.gaussian(Eigen::Vector3d::Zero(), lv);
    z(2) = pred.mean()(2) + normalize_angle(z(2) - pred.mean()(2));
    zs.push_back(z);
  }
  const SampleMoments sm = sample_moments(zs);
  for (int i = 0; i < 3; ++i) {
    // the first-order mean carries an O(sigma²) bias
    CHECK(std::abs(sm.mean(i) - pred.mean()(i)) < 3 * sm.mean_se(i) + 0.05 * std::sqrt(pred.cov()(i, i)));
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(sm.cov(i, j) - pred.cov()(i, j)) <
            3 * sm.cov_se(i, j) + 0.02 * std::sqrt(pred.cov()(i, i) * pred.cov()(j, j)));
    }
  }
}

TEST_CASE("rectangle constraint on perturbed near-rectangles") {
  std::mt19937_64 gen(54);
  std::normal_distribution<double> nd(0.0, 0.05);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<Eigen::Vector2d, 4> p = kUnitSquare;
    for (auto& v : p) v += Eigen::Vector2d(nd(gen), nd(gen));
    Corners c = corners(p, 0.0025);
    const SensorModel s = rectangle_sensor(c.map, c.ids[0], c.ids[1], c.ids[2], c.ids[3], eye(3, 1e-8));
    const double before = predict_measurement(c.map, s).mean().norm();
    const Eigen::VectorXd var_before = c.map.covariance().diagonal();
    c.map.iekf_update(s, Eigen::Vector3d::Zero(), 1e-12, 50);
    const double after = predict_measurement(c.map, s).mean().norm();
    REQUIRE(after < 0.05 * before);
    REQUIRE((c.map.covariance().diagonal() - var_before).maxCoeff() <= 1e-12);
  }
}
