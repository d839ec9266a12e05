#include "stochmap/monte_carlo.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "stochmap/error.hpp"
#include "stochmap/random.hpp"
#include "stochmap/transforms2d.hpp"

namespace stochmap {
namespace {

constexpr std::size_t kBlock = 4096;
constexpr double kRoundoff = 1e-12;

struct Sums {
  Eigen::Vector3d s1 = Eigen::Vector3d::Zero();
  Eigen::Matrix3d s2 = Eigen::Matrix3d::Zero();
  Eigen::Vector3d s3 = Eigen::Vector3d::Zero();
  Eigen::Vector3d s4 = Eigen::Vector3d::Zero();

  void add(const Eigen::Vector3d& d) {
    s1 += d;
    s2 += d * d.transpose();
    s3 += d.cwiseProduct(d).cwiseProduct(d);
    s4 += d.cwiseProduct(d).cwiseProduct(d).cwiseProduct(d);
  }
  void add(const Sums& o) {
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
  }
};

unsigned thread_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STOCHMAP_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Pose2 link_value(const ChainLink& link, const Eigen::Vector3d& x) {
  const Pose2 p = Pose2::from_vector(x);
  return link.reversed ? inverse2(p) : p;
}

/// Analytic Jacobian of the chain with respect to the stacked link vector.
Eigen::MatrixXd chain_jacobian(std::span<const ChainLink> chain,
                               std::span<const Eigen::Vector3d> x) {
  const Eigen::Index n = static_cast<Eigen::Index>(chain.size());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3 * n);
  Pose2 acc = link_value(chain[0], x[0]);
  g.leftCols<3>() = chain[0].reversed ? Eigen::Matrix3d(jac_inverse2(Pose2::from_vector(x[0]), acc))
                                      : Eigen::Matrix3d::Identity();
  for (Eigen::Index k = 1; k < n; ++k) {
    const Pose2 p = Pose2::from_vector(x[k]);
    const Pose2 y = chain[k].reversed ? inverse2(p) : p;
    const Eigen::Matrix3d jy =
        chain[k].reversed ? Eigen::Matrix3d(jac_inverse2(p, y)) : Eigen::Matrix3d::Identity();
    const Pose2 next = compose2(acc, y);
    const CompoundJacobian2 j = jac_compose2(acc, y, next);
    g = (j.leftCols<3>() * g).eval();
    g.middleCols<3>(3 * k) = j.rightCols<3>() * jy;
    acc = next;
  }
  return g;
}

EstimateErrors compare(const Gaussian& est, const Eigen::Vector3d& mc_mean,
                       const Eigen::Matrix3d& mc_cov) {
  EstimateErrors e{est, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)};
  Eigen::Vector3d diff = est.mean() - mc_mean;
  diff(2) = normalize_angle(diff(2));
  for (int k = 0; k < 3; ++k) {
    // differences at rounding level count as agreement
    const double scale = std::max(std::abs(mc_mean(k)), std::sqrt(mc_cov(k, k)));
    const double dm = std::abs(diff(k));
    e.mean_rel(k) = dm <= kRoundoff * (1.0 + scale) ? 0.0 : dm / std::max(scale, kRoundoff);
    const double dv = std::abs(est.cov()(k, k) - mc_cov(k, k));
    e.var_rel(k) = dv <= kRoundoff * kRoundoff ? 0.0 : dv / std::max(mc_cov(k, k), kRoundoff * kRoundoff);
  }
  e.mean_distance = diff.norm();
  return e;
}

}  // namespace

double EstimateErrors::max_rel() const { return std::max(mean_rel.maxCoeff(), var_rel.maxCoeff()); }

Eigen::Vector3d chain_value(std::span<const ChainLink> chain, std::span<const Eigen::Vector3d> x) {
  Pose2 acc = link_value(chain[0], x[0]);
  for (std::size_t k = 1; k < chain.size(); ++k) acc = compose2(acc, link_value(chain[k], x[k]));
  return acc.vector();
}

MonteCarloReport monte_carlo_validate(std::span<const ChainLink> chain,
                                      const MonteCarloOptions& options) {
  if (chain.empty()) throw Error(ErrorKind::InvalidValue, "empty relation chain");
  if (options.samples < 2) throw Error(ErrorKind::InvalidValue, "need at least two samples");
  const std::size_t n = chain.size();
  std::vector<Eigen::Vector3d> means;
  std::vector<Eigen::MatrixXd> factors;
  Eigen::VectorXd stacked(3 * n);
  Eigen::MatrixXd stacked_cov = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  for (std::size_t k = 0; k < n; ++k) {
    const Gaussian& g = chain[k].relation;
    if (g.dim() != 3) throw Error(ErrorKind::ShapeMismatch, "chain links must be planar poses");
    means.emplace_back(g.mean());
    factors.push_back(covariance_factor(g.cov()));
    stacked.segment<3>(3 * k) = g.mean();
    stacked_cov.block<3, 3>(3 * k, 3 * k) = g.cov();
  }
  const Eigen::Vector3d center = chain_value(chain, means);

  const std::size_t blocks = (options.samples + kBlock - 1) / kBlock;
  std::vector<Sums> partial(blocks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<Eigen::Vector3d> x(n);
    for (std::size_t b = next++; b < blocks; b = next++) {
      const std::size_t end = std::min(options.samples, (b + 1) * kBlock);
      for (std::size_t i = b * kBlock; i < end; ++i) {
        CounterRng rng(options.seed, i);
        for (std::size_t k = 0; k < n; ++k) {
          x[k] = rng.gaussian(means[k], factors[k]);
        }
        Eigen::Vector3d d = chain_value(chain, x) - center;
        d(2) = normalize_angle(d(2));
        partial[b].add(d);
      }
    }
  };
  const unsigned threads =
      std::min<unsigned>(thread_count(options.threads), static_cast<unsigned>(blocks));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  Sums total;
  for (const Sums& s : partial) total.add(s);
  const double count = static_cast<double>(options.samples);
  const Eigen::Vector3d mu = total.s1 / count;
  const Eigen::Matrix3d raw2 = total.s2 / count;
  Eigen::Matrix3d cov = (raw2 - mu * mu.transpose()) * (count / (count - 1.0));
  cov = (cov + cov.transpose()) / 2.0;

  MonteCarloReport r;
  r.samples = options.samples;
  r.mc_mean = center + mu;
  r.mc_mean(2) = normalize_angle(r.mc_mean(2));
  r.mc_cov = cov;
  r.mc_mean_se = (cov.diagonal() / count).cwiseSqrt();
  r.mc_var_se = Eigen::VectorXd(3);
  for (int k = 0; k < 3; ++k) {
    const double m = mu(k);
    const double e2 = raw2(k, k);
    const double e3 = total.s3(k) / count;
    const double e4 = total.s4(k) / count;
    const double m4 = e4 - 4 * m * e3 + 6 * m * m * e2 - 3 * m * m * m * m;
    const double var = cov(k, k);
    r.mc_var_se(k) = std::sqrt(std::max(0.0, m4 - var * var) / count);
  }

  const Eigen::MatrixXd jac = chain_jacobian(chain, means);
  const Gaussian input(stacked, stacked_cov);
  VectorFunction f = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    std::vector<Eigen::Vector3d> xs(n);
    for (std::size_t k = 0; k < n; ++k) xs[k] = v.segment<3>(3 * k);
    return chain_value(chain, xs);
  };
  const Gaussian first = propagate_first_order(f, jac, input);
  r.first_order = compare(first, r.mc_mean, cov);
  if (options.second_order) {
    const std::array<int, 1> angles{2};
    const std::vector<Eigen::MatrixXd> h = finite_difference_hessians(f, stacked, angles);
    Gaussian second = propagate_second_order(f, jac, h, input);
    r.second_order = compare(second, r.mc_mean, cov);
  }
  return r;
}

}  // namespace stochmap
