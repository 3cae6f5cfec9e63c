#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ilpcm {

// Seeded random stream. One instance per chain; never shared across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  // Open interval (0, 1).
  double uniform();
  double normal(double mean = 0.0, double sd = 1.0);
  // Gamma with shape/rate parametrization.
  double gamma(double shape, double rate);
  // Inverse gamma with shape/scale: 1 / Gamma(shape, rate = scale).
  double inv_gamma(double shape, double scale);
  double beta(double a, double b);
  double chi_squared(double dof);
  // Normal(mean, sd^2) restricted to [lower, inf), by inverse CDF. Tails are
  // handled through the complemented quantile so deep truncations stay exact.
  double truncated_normal(double mean, double sd, double lower);
  // Index drawn with probability proportional to weights (non-negative).
  std::size_t categorical(std::span<const double> weights);
  std::size_t uniform_index(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

}  // namespace ilpcm
