#include "stochmap/propagate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include "stochmap/error.hpp"
#include "stochmap/transforms2d.hpp"

namespace stochmap {
namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

Eigen::VectorXd wrapped_difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                   std::span<const int> angle_outputs) {
  Eigen::VectorXd d = a - b;
  for (int i : angle_outputs) {
    if (i >= 0 && i < d.size()) d(i) = normalize_angle(d(i));
  }
  return d;
}

Eigen::VectorXd evaluate_finite(const VectorFunction& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = f(x);
  if (!y.allFinite()) {
    throw Error(ErrorKind::NumericalFailure, "function evaluation is not finite");
  }
  return y;
}

}  // namespace

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& c) { return 0.5 * (c + c.transpose()); }

void check_covariance(const Eigen::MatrixXd& c) {
  if (c.rows() != c.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "covariance is not square");
  }
  if (!all_finite(c)) {
    throw Error(ErrorKind::InvalidValue, "covariance is not finite");
  }
  if (c.size() == 0) return;
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorKind::NonPositiveDefinite, "covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(c), Eigen::EigenvaluesOnly);
  const double tol = 1e-10 * std::abs(c.trace());
  if (eig.eigenvalues().minCoeff() < -tol) {
    throw Error(ErrorKind::NonPositiveDefinite, "covariance has a negative eigenvalue");
  }
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrized(c));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

Gaussian::Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "mean and covariance dimensions differ");
  }
  if (!mean_.allFinite()) {
    throw Error(ErrorKind::InvalidValue, "mean is not finite");
  }
  check_covariance(cov_);
  cov_ = symmetrized(cov_);
}

Gaussian Gaussian::exact(Eigen::VectorXd mean) {
  const Eigen::Index n = mean.size();
  return {std::move(mean), Eigen::MatrixXd::Zero(n, n)};
}

Gaussian linear_moments(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, const Gaussian& g) {
  if (m.cols() != g.dim() || m.rows() != b.size()) {
    throw Error(ErrorKind::ShapeMismatch, "linear map does not conform to its input");
  }
  return {m * g.mean() + b, symmetrized(m * g.cov() * m.transpose())};
}

Eigen::MatrixXd cross_cov_transform(const Eigen::MatrixXd& m, const Eigen::MatrixXd& cxz) {
  if (m.cols() != cxz.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "cross-covariance does not conform to the map");
  }
  return m * cxz;
}

Gaussian propagate_first_order(const VectorFunction& f, const Eigen::MatrixXd& jf,
                               const Gaussian& g) {
  Eigen::VectorXd y = f(g.mean());
  if (jf.cols() != g.dim() || jf.rows() != y.size()) {
    throw Error(ErrorKind::ShapeMismatch, "Jacobian does not conform to the function");
  }
  return {std::move(y), symmetrized(jf * g.cov() * jf.transpose())};
}

Eigen::MatrixXd second_order_covariance(const Eigen::MatrixXd& jf,
                                        std::span<const Eigen::MatrixXd> hessians,
                                        const Eigen::MatrixXd& cov, SecondOrderCovariance form) {
  const auto r = static_cast<Eigen::Index>(hessians.size());
  if (jf.rows() != r || jf.cols() != cov.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "second-order terms do not conform");
  }
  for (const auto& h : hessians) {
    if (h.rows() != cov.rows() || h.cols() != cov.cols()) {
      throw Error(ErrorKind::ShapeMismatch, "Hessian does not conform to the input");
    }
  }
  Eigen::MatrixXd c = jf * cov * jf.transpose();
  if (form == SecondOrderCovariance::GaussianTrace) {
    std::vector<Eigen::MatrixXd> hc;
    hc.reserve(hessians.size());
    for (const auto& h : hessians) hc.push_back(h * cov);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < r; ++j) {
        c(i, j) += 0.5 * (hc[i] * hc[j]).trace();
      }
    }
  } else {
    Eigen::VectorXd shift(r);
    for (Eigen::Index i = 0; i < r; ++i) shift(i) = (hessians[i] * cov).trace();
    c -= 0.25 * shift * shift.transpose();
  }
  return symmetrized(c);
}

Gaussian propagate_second_order(const VectorFunction& f, const Eigen::MatrixXd& jf,
                                std::span<const Eigen::MatrixXd> hessians, const Gaussian& g,
                                SecondOrderCovariance form) {
  Eigen::VectorXd y = f(g.mean());
  if (y.size() != static_cast<Eigen::Index>(hessians.size())) {
    throw Error(ErrorKind::ShapeMismatch, "need one Hessian per output");
  }
  Eigen::MatrixXd c = second_order_covariance(jf, hessians, g.cov(), form);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y(i) += 0.5 * (hessians[i] * g.cov()).trace();
  }
  return {std::move(y), std::move(c)};
}

Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Eigen::VectorXd& x,
                                           std::span<const int> angle_outputs,
                                           const Eigen::VectorXd& steps) {
  if (steps.size() != 0 && steps.size() != x.size()) {
    throw Error(ErrorKind::ShapeMismatch, "one step per component is required");
  }
  const Eigen::VectorXd y0 = evaluate_finite(f, x);
  Eigen::MatrixXd j(y0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = steps.size() != 0 ? steps(k) : std::max(1e-6, 1e-6 * std::abs(x(k)));
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp(k) += h;
    xm(k) -= h;
    const Eigen::VectorXd d =
        wrapped_difference(evaluate_finite(f, xp), evaluate_finite(f, xm), angle_outputs);
    j.col(k) = d / (xp(k) - xm(k));
  }
  return j;
}

std::vector<Eigen::MatrixXd> finite_difference_hessians(const VectorFunction& f,
                                                        const Eigen::VectorXd& x,
                                                        std::span<const int> angle_outputs) {
  const Eigen::Index n = x.size();
  const Eigen::VectorXd y0 = evaluate_finite(f, x);
  Eigen::VectorXd h(n);
  for (Eigen::Index k = 0; k < n; ++k) h(k) = std::max(1e-4, 1e-4 * std::abs(x(k)));

  auto delta = [&](const Eigen::VectorXd& at) {
    return wrapped_difference(evaluate_finite(f, at), y0, angle_outputs);
  };
  auto shifted = [&](Eigen::Index i, double si, Eigen::Index j, double sj) {
    Eigen::VectorXd p = x;
    p(i) += si * h(i);
    if (j >= 0) p(j) += sj * h(j);
    return delta(p);
  };

  std::vector<Eigen::MatrixXd> hess(y0.size(), Eigen::MatrixXd::Zero(n, n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd d2 = (shifted(i, 1, -1, 0) + shifted(i, -1, -1, 0)) / (h(i) * h(i));
    for (Eigen::Index r = 0; r < y0.size(); ++r) hess[r](i, i) = d2(r);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Eigen::VectorXd dm = (shifted(i, 1, j, 1) - shifted(i, 1, j, -1) -
                                  shifted(i, -1, j, 1) + shifted(i, -1, j, -1)) /
                                 (4.0 * h(i) * h(j));
      for (Eigen::Index r = 0; r < y0.size(); ++r) {
        hess[r](i, j) = dm(r);
        hess[r](j, i) = dm(r);
      }
    }
  }
  return hess;
}

double chi_square_quantile(double p, int dof) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorKind::InvalidValue, "probability must lie in (0, 1)");
  }
  if (dof < 1) {
    throw Error(ErrorKind::InvalidValue, "degrees of freedom must be positive");
  }
  const double k = 0.5 * dof;
  auto cdf = [k](double x) { return boost::math::gamma_p(k, 0.5 * x); };
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(dof));
  while (cdf(hi) < p) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Ellipse confidence_ellipse(const Eigen::Vector2d& center, const Eigen::Matrix2d& cov, double p) {
  if (!cov.allFinite() || !center.allFinite()) {
    throw Error(ErrorKind::InvalidValue, "ellipse input is not finite");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(0.5 * (cov + cov.transpose()));
  const Eigen::Vector2d lambda = eig.eigenvalues();  // ascending
  if (!(lambda(0) > 0.0)) {
    throw Error(ErrorKind::NonPositiveDefinite, "position covariance is not positive definite");
  }
  const double k2 = chi_square_quantile(p, 2);
  const Eigen::Vector2d major = eig.eigenvectors().col(1);
  double orientation = std::atan2(major.y(), major.x());
  if (orientation <= -kPi / 2) orientation += kPi;
  if (orientation > kPi / 2) orientation -= kPi;
  Ellipse e;
  e.center = center;
  e.semi_axes = {std::sqrt(k2 * lambda(1)), std::sqrt(k2 * lambda(0))};
  e.orientation = orientation;
  e.confidence = p;
  return e;
}

Ellipse confidence_ellipse(const Gaussian& g, double p) {
  if (g.dim() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "confidence ellipse needs a 2-dimensional Gaussian");
  }
  return confidence_ellipse(Eigen::Vector2d(g.mean()), Eigen::Matrix2d(g.cov()), p);
}

double correlation(const Gaussian& g, Eigen::Index i, Eigen::Index j) {
  if (i < 0 || j < 0 || i >= g.dim() || j >= g.dim()) {
    throw Error(ErrorKind::ShapeMismatch, "correlation index out of range");
  }
  const double si = std::sqrt(g.cov()(i, i));
  const double sj = std::sqrt(g.cov()(j, j));
  if (!(si > 0.0) || !(sj > 0.0)) {
    throw Error(ErrorKind::ZeroVariance, "correlation needs positive variances");
  }
  const double rho = g.cov()(i, j) / (si * sj);
  if (std::abs(rho) > 1.0 + 1e-10) {
    throw Error(ErrorKind::CorrelationOutOfRange, "correlation coefficient exceeds 1");
  }
  return std::clamp(rho, -1.0, 1.0);
}

}  // namespace stochmap
