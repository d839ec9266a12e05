#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include <Eigen/Core>

#include "stochmap/propagate.hpp"

namespace stochmap {

/// One planar relation in a chain x_1 ⊕ x_2 ⊕ ... ; a reversed link enters as ⊖x_k.
struct ChainLink {
  Gaussian relation;
  bool reversed = false;
};

struct MonteCarloOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  bool second_order = false;
  /// 0 picks STOCHMAP_THREADS, else the hardware concurrency.
  unsigned threads = 0;
};

struct EstimateErrors {
  Gaussian estimate = Gaussian::exact(Eigen::VectorXd());
  /// |mean - mc_mean| / max(|mc_mean|, mc_sigma), per component.
  Eigen::VectorXd mean_rel;
  /// |var - mc_var| / mc_var, per component.
  Eigen::VectorXd var_rel;
  double max_rel() const;
  /// Euclidean distance between the estimated and sampled means.
  double mean_distance = 0.0;
};

struct MonteCarloReport {
  std::size_t samples = 0;
  Eigen::VectorXd mc_mean;
  Eigen::MatrixXd mc_cov;
  Eigen::VectorXd mc_mean_se;
  Eigen::VectorXd mc_var_se;
  EstimateErrors first_order;
  std::optional<EstimateErrors> second_order;
};

/// Planar chain value, with angles normalized.
Eigen::Vector3d chain_value(std::span<const ChainLink> chain, std::span<const Eigen::Vector3d> x);

/// Samples every link independently, pushes the samples through the exact
/// chain and compares the sample moments with the propagated ones. The
/// result does not depend on the thread count.
MonteCarloReport monte_carlo_validate(std::span<const ChainLink> chain,
                                      const MonteCarloOptions& options = {});

}  // namespace stochmap
