#include <array>

#include "doctest.h"
#include "stochmap/error.hpp"
#include "stochmap/monte_carlo.hpp"
#include "support.hpp"

using namespace stochmap;
using namespace testing;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_spd(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(gen);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd square(const Eigen::VectorXd& x) { return x.cwiseProduct(x); }

}  // namespace

TEST_CASE("Gaussian validation") {
  CHECK_THROWS_AS(Gaussian(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(3, 3)), Error);
  Eigen::Matrix2d asym;
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(Gaussian(Eigen::VectorXd::Zero(2), asym), Error);
  Eigen::Matrix2d neg;
  neg << 1, 2, 2, 1;
  CHECK_THROWS_AS(Gaussian(Eigen::VectorXd::Zero(2), neg), Error);
  Eigen::Matrix2d tiny;
  tiny << 1, 1e-12, 0, 1;
  const Gaussian g(Eigen::VectorXd::Zero(2), tiny);
  CHECK(g.cov()(0, 1) == g.cov()(1, 0));
}

TEST_CASE("linear_moments") {
  std::mt19937_64 gen(31);
  const Gaussian g(Eigen::Vector3d(1, 2, 3), random_spd(gen, 3));
  const Gaussian same = linear_moments(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), g);
  CHECK((same.mean() - g.mean()).norm() == 0.0);
  CHECK((same.cov() - g.cov()).norm() == 0.0);
  const Gaussian s = linear_moments(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1),
                                    Gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1)));
  CHECK(s.cov()(0, 0) == 4.0);
  CHECK_THROWS_AS(linear_moments(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Zero(2), g), Error);
  CHECK_THROWS_AS(linear_moments(Eigen::MatrixXd::Ones(2, 3), Eigen::VectorXd::Zero(3), g), Error);
}

TEST_CASE("linear_moments and cross covariance against Monte Carlo") {
  std::mt19937_64 gen(32);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = nd(gen);
  const Eigen::Vector2d b(0.5, -1.0);
  const Gaussian g(Eigen::Vector3d(1, -2, 0.3), random_spd(gen, 3));
  const Gaussian y = linear_moments(m, b, g);
  const Eigen::MatrixXd lx = covariance_factor(g.cov());
  CounterRng rng(99, 0);
  std::vector<Eigen::VectorXd> joint;
  const int n = 1'000'000;
  joint.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd x = rng.gaussian(g.mean(), lx);
    Eigen::VectorXd row(5);
    row << m * x + b, x;
    joint.push_back(row);
  }
  const SampleMoments s = sample_moments(joint);
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(s.mean(i) - y.mean()(i)) < 3 * s.mean_se(i) + 1e-12);
    for (int j = 0; j < 2; ++j) CHECK(std::abs(s.cov(i, j) - y.cov()(i, j)) < 3 * s.cov_se(i, j));
  }
  const Eigen::MatrixXd cyx = cross_cov_transform(m, g.cov());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::abs(s.cov(i, 2 + j) - cyx(i, j)) < 3 * s.cov_se(i, 2 + j));
}

TEST_CASE("cross_cov_transform") {
  const Eigen::MatrixXd c = Eigen::MatrixXd::Random(3, 2);
  CHECK((cross_cov_transform(Eigen::Matrix3d::Identity(), c) - c).norm() == 0.0);
  CHECK(cross_cov_transform(Eigen::MatrixXd::Random(4, 3), Eigen::MatrixXd::Zero(3, 2)).norm() == 0.0);
  CHECK_THROWS_AS(cross_cov_transform(Eigen::MatrixXd::Random(4, 2), c), Error);
}

TEST_CASE("propagate_first_order") {
  std::mt19937_64 gen(33);
  const Gaussian g(Eigen::Vector3d(1, 2, 3), random_spd(gen, 3));
  const Eigen::Matrix3d m = random_spd(gen, 3);
  const Eigen::Vector3d b(1, 0, -1);
  const Gaussian lin = linear_moments(m, b, g);
  const Gaussian fo = propagate_first_order(
      [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return m * x + b; }, m, g);
  CHECK((fo.mean() - lin.mean()).norm() < 1e-12);
  CHECK((fo.cov() - lin.cov()).norm() < 1e-12);

  const Gaussian x0(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1));
  const Gaussian sq = propagate_first_order(square, Eigen::MatrixXd::Zero(1, 1), x0);
  CHECK(sq.mean()(0) == 0.0);
  CHECK(sq.cov()(0, 0) == 0.0);
  CHECK_THROWS_AS(propagate_first_order(square, Eigen::MatrixXd::Zero(2, 2), x0), Error);
}

TEST_CASE("propagate_second_order on x squared") {
  const Gaussian x0(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1));
  const std::vector<Eigen::MatrixXd> h{Eigen::MatrixXd::Constant(1, 1, 2.0)};
  const Gaussian so = propagate_second_order(square, Eigen::MatrixXd::Zero(1, 1), h, x0);
  CHECK(so.mean()(0) == 1.0);
  CHECK(so.cov()(0, 0) == Approx(2.0).epsilon(1e-15));
  const Eigen::MatrixXd shift = second_order_covariance(Eigen::MatrixXd::Zero(1, 1), h, x0.cov(),
                                                        SecondOrderCovariance::SubtractMeanShift);
  CHECK(shift(0, 0) == Approx(-1.0).epsilon(1e-15));

  // Which form converges: Monte Carlo of x² with x ~ N(0.7, 0.5).
  const Gaussian g(Eigen::VectorXd::Constant(1, 0.7), Eigen::MatrixXd::Constant(1, 1, 0.5));
  CounterRng rng(5, 0);
  std::vector<Eigen::VectorXd> ys;
  const Eigen::MatrixXd l = covariance_factor(g.cov());
  for (int k = 0; k < 1'000'000; ++k) ys.push_back(square(rng.gaussian(g.mean(), l)));
  const SampleMoments s = sample_moments(ys);
  const Eigen::MatrixXd jf = Eigen::MatrixXd::Constant(1, 1, 1.4);
  const Eigen::MatrixXd trace_form =
      second_order_covariance(jf, h, g.cov(), SecondOrderCovariance::GaussianTrace);
  const Eigen::MatrixXd shift_form =
      second_order_covariance(jf, h, g.cov(), SecondOrderCovariance::SubtractMeanShift);
  CHECK(std::abs(trace_form(0, 0) - s.cov(0, 0)) < 3 * s.cov_se(0, 0));
  CHECK(std::abs(shift_form(0, 0) - s.cov(0, 0)) > 10 * s.cov_se(0, 0));
  const Gaussian so2 = propagate_second_order(square, jf, h, g);
  CHECK(std::abs(so2.mean()(0) - s.mean(0)) < 3 * s.mean_se(0));
}

TEST_CASE("propagate_second_order reduces to first order for linear f") {
  std::mt19937_64 gen(34);
  const Gaussian g(Eigen::Vector2d(1, 2), random_spd(gen, 2));
  const Eigen::Matrix2d m = random_spd(gen, 2);
  auto f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return m * x; };
  const std::vector<Eigen::MatrixXd> h = finite_difference_hessians(f, g.mean());
  const Gaussian a = propagate_first_order(f, m, g);
  const Gaussian b = propagate_second_order(f, m, h, g);
  CHECK((a.mean() - b.mean()).norm() < 1e-6);
  CHECK((a.cov() - b.cov()).norm() < 1e-6);
}

TEST_CASE("finite differences") {
  std::mt19937_64 gen(35);
  const Eigen::MatrixXd m = random_spd(gen, 3).topRows(2);
  auto f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return m * x; };
  CHECK((finite_difference_jacobian(f, Eigen::Vector3d(1, -4, 2)) - m).cwiseAbs().maxCoeff() < 1e-9);
  auto s = [](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, std::sin(x(0)));
  };
  CHECK(std::abs(finite_difference_jacobian(s, Eigen::VectorXd::Zero(1))(0, 0) - 1.0) < 1e-10);
  const std::vector<Eigen::MatrixXd> h = finite_difference_hessians(square, Eigen::VectorXd::Zero(1));
  CHECK(h[0](0, 0) == Approx(2.0).epsilon(1e-6));
  auto bad = [](const Eigen::VectorXd&) -> Eigen::VectorXd {
    return Eigen::VectorXd::Constant(1, std::nan(""));
  };
  CHECK_THROWS_AS(finite_difference_jacobian(bad, Eigen::VectorXd::Zero(1)), Error);
}

TEST_CASE("chi_square_quantile") {
  CHECK(chi_square_quantile(0.999, 2) == Approx(-2 * std::log(0.001)).epsilon(1e-12));
  CHECK(chi_square_quantile(0.999, 3) == Approx(16.266236196238).epsilon(1e-10));
  CHECK(chi_square_quantile(0.95, 1) == Approx(3.841458820694124).epsilon(1e-10));
  CHECK_THROWS_AS(chi_square_quantile(1.0, 2), Error);
  CHECK_THROWS_AS(chi_square_quantile(0.5, 0), Error);
}

TEST_CASE("confidence_ellipse") {
  const Ellipse c = confidence_ellipse(Eigen::Vector2d(1, 2), Eigen::Matrix2d::Identity(), 0.999);
  CHECK(c.semi_axes(0) == Approx(3.7169).epsilon(1e-4));
  CHECK(c.semi_axes(0) == Approx(std::sqrt(-2 * std::log(0.001))).epsilon(1e-12));
  CHECK(c.semi_axes(1) == Approx(c.semi_axes(0)).epsilon(1e-12));
  CHECK(c.center == Eigen::Vector2d(1, 2));

  Eigen::Matrix2d d;
  d << 4, 0, 0, 1;
  const Ellipse e = confidence_ellipse(Eigen::Vector2d::Zero(), d, 0.9);
  CHECK(e.semi_axes(0) / e.semi_axes(1) == Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(e.orientation) < 1e-12);

  const double angle = 0.6;
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Ellipse rot = confidence_ellipse(Eigen::Vector2d::Zero(), r * d * r.transpose(), 0.9);
  CHECK(rot.orientation == Approx(angle).epsilon(1e-10));
  CHECK(rot.orientation > -kPi / 2);
  CHECK(rot.orientation <= kPi / 2);

  double prev = 0.0;
  for (double p : {0.1, 0.5, 0.9, 0.99, 0.999}) {
    const Ellipse x = confidence_ellipse(Eigen::Vector2d::Zero(), d, p);
    CHECK(x.semi_axes(0) > prev);
    prev = x.semi_axes(0);
  }
  Eigen::Matrix2d singular;
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(confidence_ellipse(Eigen::Vector2d::Zero(), singular, 0.9), Error);
}

TEST_CASE("correlation") {
  const Gaussian diag(Eigen::Vector2d::Zero(), Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix());
  CHECK(correlation(diag, 0, 1) == 0.0);
  Eigen::Matrix2d ones;
  ones << 1, 1, 1, 1;
  CHECK(correlation(Gaussian(Eigen::Vector2d::Zero(), ones), 0, 1) == Approx(1.0));
  const Gaussian z(Eigen::Vector2d::Zero(), Eigen::Vector2d(0, 1).asDiagonal().toDenseMatrix());
  CHECK_THROWS_AS(correlation(z, 0, 1), Error);
  std::mt19937_64 gen(36);
  for (int k = 0; k < 200; ++k) {
    const Gaussian g(Eigen::VectorXd::Zero(4), random_spd(gen, 4));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) REQUIRE(std::abs(correlation(g, i, j)) <= 1.0);
  }
}

TEST_CASE("recursive and chained first-order estimates agree") {
  std::mt19937_64 gen(37);
  for (int k = 0; k < 200; ++k) {
    const Pose2 a = random_pose2(gen), b = random_pose2(gen);
    const Eigen::Matrix3d ca = random_spd(gen, 3) * 0.01, cb = random_spd(gen, 3) * 0.01;
    const Pose2 ia = inverse2(a);
    const Eigen::Matrix3d jm = jac_inverse2(a, ia);
    const Eigen::Matrix3d c_ia = jm * ca * jm.transpose();
    const CompoundJacobian2 jc = jac_compose2(ia, b, compose2(ia, b));
    const Eigen::Matrix3d recursive = jc.leftCols<3>() * c_ia * jc.leftCols<3>().transpose() +
                                      jc.rightCols<3>() * cb * jc.rightCols<3>().transpose();
    const TailToTail2 t = tail_to_tail2(a, b);
    Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(6, 6);
    joint.topLeftCorner<3, 3>() = ca;
    joint.bottomRightCorner<3, 3>() = cb;
    const Eigen::Matrix3d chained = t.jacobian * joint * t.jacobian.transpose();
    REQUIRE((recursive - chained).cwiseAbs().maxCoeff() < 1e-12);
  }
}
