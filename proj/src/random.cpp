#include "stochmap/random.hpp"

#include <cmath>

#include "stochmap/transforms2d.hpp"

namespace stochmap {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix(mix(seed + kGolden * (stream + 1)) + kGolden * (index + 1));
}

double CounterRng::uniform_at(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return (static_cast<double>(bits_at(seed, stream, index) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::uniform() { return uniform_at(seed_, stream_, counter_++); }

double CounterRng::normal() {
  if (counter_ % 2 != 0) ++counter_;
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

Eigen::VectorXd CounterRng::gaussian(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& cov_factor) {
  Eigen::VectorXd n(cov_factor.cols());
  for (Eigen::Index i = 0; i < n.size(); ++i) n(i) = normal();
  return mean + cov_factor * n;
}

}  // namespace stochmap
