#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace stochmap {

/// Counter-based pseudo-random source. Draw number i of stream s under seed k
/// is a pure function of (k, s, i):
///
///   h = mix(mix(k + G * (s + 1)) + G * (i + 1)),  G = 0x9E3779B97F4A7C15
///
/// where mix is the SplitMix64 finalizer. Uniforms take the top 53 bits of h
/// and lie in the open interval (0, 1). Normals use Box-Muller on the uniform
/// pair (2j, 2j + 1) and keep the cosine branch only, so normal draw j never
/// depends on how many draws came before it in another stream.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  static std::uint64_t bits_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);
  static double uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double uniform();
  double normal();
  /// mean + L n with L a factor of cov and n standard normal.
  Eigen::VectorXd gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov_factor);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace stochmap
