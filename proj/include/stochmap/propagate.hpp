#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace stochmap {

/// First two moments of an uncertain quantity. The covariance is symmetrized
/// on construction and must be positive semi-definite.
class Gaussian {
 public:
  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  /// Mean `mean` with zero covariance.
  static Gaussian exact(Eigen::VectorXd mean);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

struct Ellipse {
  Eigen::Vector2d center;
  Eigen::Vector2d semi_axes;  // major first
  double orientation = 0.0;   // of the major axis, in (-pi/2, pi/2]
  double confidence = 0.0;
};

using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// (C + C^T) / 2.
Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& c);

/// Throws NonPositiveDefinite unless c is symmetric PSD within tolerance.
void check_covariance(const Eigen::MatrixXd& c);

/// L with L L^T = c for a symmetric PSD c (negative rounding eigenvalues are clipped).
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& c);

/// Exact moments of y = M x + b.
Gaussian linear_moments(const Eigen::MatrixXd& m, const Eigen::VectorXd& b, const Gaussian& g);

/// C(y, z) = M C(x, z) for y = M x + b.
Eigen::MatrixXd cross_cov_transform(const Eigen::MatrixXd& m, const Eigen::MatrixXd& cxz);

/// Linearized moments: mean f(x̂), covariance Jf C Jf^T. `jf` is the Jacobian at g.mean().
Gaussian propagate_first_order(const VectorFunction& f, const Eigen::MatrixXd& jf,
                               const Gaussian& g);

/// How the second-order covariance estimate corrects the first-order one.
enum class SecondOrderCovariance {
  /// C += ½ tr(H_i C H_j C). Exact for quadratic f and Gaussian x.
  GaussianTrace,
  /// C -= δ δ^T with δ the second-order mean shift. Kept for comparison only:
  /// it yields negative variances on f(x) = x².
  SubtractMeanShift,
};

/// Second-order covariance estimate without the PSD check that Gaussian applies.
Eigen::MatrixXd second_order_covariance(const Eigen::MatrixXd& jf,
                                        std::span<const Eigen::MatrixXd> hessians,
                                        const Eigen::MatrixXd& cov, SecondOrderCovariance form);

/// Mean f(x̂) + ½ tr(H_i C) per output; covariance per `form`.
/// `hessians[i]` is the Hessian of output i at g.mean().
Gaussian propagate_second_order(const VectorFunction& f, const Eigen::MatrixXd& jf,
                                std::span<const Eigen::MatrixXd> hessians, const Gaussian& g,
                                SecondOrderCovariance form = SecondOrderCovariance::GaussianTrace);

/// Central-difference Jacobian with per-component step max(1e-6, 1e-6 |x_i|),
/// or `steps` when given. Outputs listed in `angle_outputs` are differenced
/// with wrap-around.
Eigen::MatrixXd finite_difference_jacobian(const VectorFunction& f, const Eigen::VectorXd& x,
                                           std::span<const int> angle_outputs = {},
                                           const Eigen::VectorXd& steps = {});

/// Central second differences, one Hessian per output. Step max(1e-4, 1e-4 |x_i|).
std::vector<Eigen::MatrixXd> finite_difference_hessians(const VectorFunction& f,
                                                        const Eigen::VectorXd& x,
                                                        std::span<const int> angle_outputs = {});

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
double chi_square_quantile(double p, int dof);

/// Ellipse enclosing probability p of a bivariate normal.
Ellipse confidence_ellipse(const Eigen::Vector2d& center, const Eigen::Matrix2d& cov, double p);
/// Same, for a 2-dimensional Gaussian.
Ellipse confidence_ellipse(const Gaussian& g, double p);

/// ρ_ij = σ_ij / (σ_i σ_j).
double correlation(const Gaussian& g, Eigen::Index i, Eigen::Index j);

}  // namespace stochmap
