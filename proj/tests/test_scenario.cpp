#include <sstream>

#include <Eigen/LU>

#include "doctest.h"
#include "stochmap/monte_carlo.hpp"
#include "stochmap/scenario.hpp"
#include "stochmap/serialization.hpp"
#include "support.hpp"

using namespace stochmap;
using namespace testing;

namespace {

Eigen::MatrixXd diag3(double a, double b, double c) { return Eigen::Vector3d(a, b, c).asDiagonal(); }

Scenario paper_scenario(double scale, std::uint64_t seed) {
  const Eigen::MatrixXd sense = scale * diag3(0.01, 0.01, 0.0012);
  Scenario sc;
  sc.seed = seed;
  sc.steps.push_back(SenseNew{"object1", "robot", {}, Eigen::Vector3d(3, 1, 0.3), sense, {}, 0.999});
  sc.steps.push_back(Move{"robot", Eigen::Vector3d(2, 0, 0.4), scale * diag3(0.04, 0.04, 0.0076)});
  sc.steps.push_back(
      SenseNew{"object2", "robot", {}, Eigen::Vector3d(1.5, 2.5, 0.2), sense, {"object1"}, 0.999});
  sc.steps.push_back(SenseKnown{"robot", "object1", sense, 0.999});
  return sc;
}

std::string stream_of(const std::vector<Snapshot>& s) {
  std::ostringstream out;
  write_snapshots(out, s);
  return out.str();
}

double block_det(const Snapshot& s, const std::string& name) {
  const EntityId id = *s.map.find(name);
  return s.map.block(id, id).determinant();
}

}  // namespace

TEST_CASE("empty scenario") {
  const std::vector<Snapshot> s = run(Scenario{});
  REQUIRE(s.size() == 1);
  CHECK(s[0].map.mean().norm() == 0.0);
  CHECK(s[0].map.covariance().norm() == 0.0);
  CHECK_FALSE(s[0].ellipses[0].has_value());
}

TEST_CASE("noiseless scenario tracks ground truth exactly") {
  const std::vector<Snapshot> snaps = run(paper_scenario(0.0, 3));
  REQUIRE(snaps.size() == 5);
  for (const Snapshot& s : snaps) {
    for (const Entity& e : s.map.entities()) {
      REQUIRE((s.map.mean_of(e.id) - s.truth[e.id.value]).norm() == 0.0);
    }
  }
}

TEST_CASE("paper scenario") {
  const std::vector<Snapshot> snaps = run(paper_scenario(1.0, 1985));
  REQUIRE(snaps.size() == 5);
  const StepDiagnostics& second = snaps[3].diagnostics;
  REQUIRE(second.gates.size() == 1);
  CHECK(second.gates[0].target == "object1");
  CHECK_FALSE(second.gates[0].result.accept);
  const StepDiagnostics& closing = snaps[4].diagnostics;
  REQUIRE(closing.gates.size() == 1);
  CHECK(closing.gates[0].result.accept);
  REQUIRE(closing.update.has_value());
  for (const char* name : {"robot", "object1", "object2"}) {
    CAPTURE(name);
    CHECK(block_det(snaps[4], name) < block_det(snaps[3], name));
  }
  for (const Snapshot& s : snaps) {
    for (std::size_t k = 1; k < s.ellipses.size(); ++k) CHECK(s.ellipses[k].has_value());
  }
  CHECK(stream_of(snaps) == stream_of(run(paper_scenario(1.0, 1985))));
  CHECK(stream_of(snaps) != stream_of(run(paper_scenario(1.0, 1986))));
}

TEST_CASE("gate rejection leaves the map untouched") {
  Scenario sc = paper_scenario(1.0, 5);
  const Eigen::MatrixXd tight = 1e-6 * diag3(1, 1, 1);
  sc.steps.push_back(Move{"robot", Eigen::Vector3d(1, 0, 0), diag3(0.5, 0.5, 0.2)});
  sc.steps.push_back(SenseKnown{"robot", "object1", tight, 0.5});
  auto within = [](const std::vector<Snapshot>& s) { return s.back(); };
  const std::vector<Snapshot> snaps = run(sc);
  const Snapshot last = within(snaps);
  if (!last.diagnostics.gates[0].result.accept) {
    CHECK_FALSE(last.diagnostics.update.has_value());
    CHECK((last.map.covariance() - snaps[snaps.size() - 2].map.covariance()).norm() == 0.0);
    CHECK(last.diagnostics.warnings.size() == 1);
  }
}

TEST_CASE("step failures name the step") {
  Scenario sc;
  sc.steps.push_back(Move{"robot", Eigen::Vector3d(1, 0, 0), diag3(0.1, 0.1, 0.1)});
  sc.steps.push_back(SenseKnown{"robot", "ghost", diag3(0.1, 0.1, 0.1), 0.99});
  try {
    run(sc);
    CHECK(false);
  } catch (const StepError& e) {
    CHECK(e.step() == 2);
    CHECK(e.kind() == ErrorKind::UnknownEntity);
  }
}

TEST_CASE("spatial scenario warns near singular orientations") {
  Scenario sc;
  sc.mode = MapMode::SpatialEuler;
  Eigen::VectorXd u(6);
  u << 1, 0, 0, 0.1, 0.02, 0.3;
  sc.steps.push_back(Move{"robot", u, 1e-4 * Eigen::MatrixXd::Identity(6, 6)});
  const std::vector<Snapshot> snaps = run(sc);
  CHECK(snaps.back().diagnostics.warnings.size() == 1);
}

TEST_CASE("rectangle scenario") {
  Scenario sc;
  sc.seed = 7;
  const Eigen::Matrix2d c = 0.0025 * Eigen::Matrix2d::Identity();
  const std::array<Eigen::Vector2d, 4> p{Eigen::Vector2d(4, 0), Eigen::Vector2d(4, 1.5),
                                         Eigen::Vector2d(2, 1.5), Eigen::Vector2d(2, 0)};
  for (int k = 0; k < 4; ++k) {
    sc.steps.push_back(SenseNew{"c" + std::to_string(k), "robot", EntityKind::Point2, p[k], c, {}, 0.999});
  }
  sc.steps.push_back(Constraint{{"c0", "c1", "c2", "c3"}, 1e-8 * Eigen::Matrix3d::Identity()});
  sc.steps.push_back(Query{"world", "c1"});
  const std::vector<Snapshot> snaps = run(sc);
  REQUIRE(snaps.back().diagnostics.query.has_value());
  CHECK(snaps.back().diagnostics.query->relation.dim() == 2);
  const UpdateDiagnostics& u = *snaps[5].diagnostics.update;
  CHECK(u.converged);
}

TEST_CASE("monte_carlo_validate") {
  const double s5 = 5 * kPi / 180;
  auto chain = [](double sphi, double sxy) {
    const Eigen::MatrixXd c = diag3(sxy * sxy, sxy * sxy, sphi * sphi);
    return std::vector<ChainLink>{{Gaussian(Eigen::Vector3d(1.0, 0.5, kPi / 6), c), false},
                                  {Gaussian(Eigen::Vector3d(2.0, 1.0, kPi / 4), c), false}};
  };
  MonteCarloOptions opt;
  opt.samples = 20'000;
  const MonteCarloReport zero = monte_carlo_validate(chain(0, 0), opt);
  CHECK(zero.first_order.max_rel() == 0.0);

  opt.samples = 200'000;
  opt.threads = 1;
  const MonteCarloReport one = monte_carlo_validate(chain(s5, 0.1), opt);
  opt.threads = 5;
  const MonteCarloReport five = monte_carlo_validate(chain(s5, 0.1), opt);
  CHECK((one.mc_mean - five.mc_mean).norm() == 0.0);
  CHECK((one.mc_cov - five.mc_cov).norm() == 0.0);
  CHECK(one.first_order.max_rel() < 0.01);

  opt.samples = 1'000'000;
  const MonteCarloReport wide = monte_carlo_validate(chain(30 * kPi / 180, 0.1), opt);
  CHECK(wide.first_order.max_rel() > 0.01);

  opt.second_order = true;
  const MonteCarloReport twenty = monte_carlo_validate(chain(20 * kPi / 180, 0.1), opt);
  REQUIRE(twenty.second_order.has_value());
  CHECK(twenty.second_order->mean_distance < twenty.first_order.mean_distance);

  const std::vector<ChainLink> reversed{{Gaussian(Eigen::Vector3d(1.0, 0.5, 0.4), diag3(0.01, 0.01, 0.001)), true},
                                        {Gaussian(Eigen::Vector3d(2.0, -1.0, 0.1), diag3(0.01, 0.01, 0.001)), false}};
  opt.second_order = false;
  opt.samples = 200'000;
  const MonteCarloReport rr = monte_carlo_validate(reversed, opt);
  CHECK(rr.first_order.max_rel() < 0.02);
}
