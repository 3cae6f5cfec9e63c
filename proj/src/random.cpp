#include "ilpcm/random.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ilpcm {

namespace {

std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seeded_engine(seed, 0)) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seeded_engine(seed, stream)) {}

double Rng::uniform() {
  // 53 random bits, offset by half an ulp so 0 and 1 are never returned.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Rng::normal(double mean, double sd) { return mean + sd * std_normal_(engine_); }

double Rng::gamma(double shape, double rate) {
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::inv_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

double Rng::chi_squared(double dof) { return gamma(0.5 * dof, 0.5); }

double Rng::truncated_normal(double mean, double sd, double lower) {
  static const boost::math::normal_distribution<double> unit;
  const double a = (lower - mean) / sd;
  double x;
  if (a > 0.0) {
    const double tail = boost::math::cdf(boost::math::complement(unit, a));
    if (tail <= std::numeric_limits<double>::min()) {
      // Beyond double range of the tail: exponential approximation of the
      // conditional excess, accurate to O(1/a^2).
      x = a - std::log(uniform()) / a;
    } else {
      x = boost::math::quantile(boost::math::complement(unit, uniform() * tail));
    }
  } else {
    const double lo = boost::math::cdf(unit, a);
    const double u = lo + uniform() * (1.0 - lo);
    x = u >= 1.0 ? a + 40.0 : boost::math::quantile(unit, u);
  }
  if (x < a) x = a;
  return mean + sd * x;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::domain_error("categorical: weights must have positive finite sum");
  }
  const double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] > 0.0) last_positive = k;
    acc += weights[k];
    if (target < acc) return k;
  }
  return last_positive;
}

std::size_t Rng::uniform_index(std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
}

}  // namespace ilpcm
