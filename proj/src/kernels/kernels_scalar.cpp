#include "ilpcm/kernels.hpp"

#include <cmath>

namespace ilpcm::kernels {

namespace {

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void squared_distances(const double* z, std::size_t n, std::size_t p, std::size_t i,
                       double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  for (std::size_t r = 0; r < p; ++r) {
    const double* col = z + r * n;
    const double zi = col[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = zi - col[j];
      out[j] += diff * diff;
    }
  }
}

double dyad_loglik(const double* s, const double* d, std::size_t len, double alpha,
                   double beta, double mult) {
  double acc = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double eta = alpha - beta * d[j];
    acc += s[j] * eta - mult * softplus(eta);
  }
  return acc;
}

double linearized_residuals(const double* s, const double* d, std::size_t len, double alpha,
                            double beta, double mult, double* c) {
  double total = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double w = (alpha - beta * d[j] > 0.0) ? 1.0 : 0.0;
    c[j] = s[j] - mult * w;
    total += std::fabs(c[j]);
  }
  return total;
}

double dot(const double* a, const double* b, std::size_t len) {
  double acc = 0.0;
  for (std::size_t j = 0; j < len; ++j) acc += a[j] * b[j];
  return acc;
}

}  // namespace

const KernelTable& scalar() {
  static const KernelTable table{"scalar", squared_distances, dyad_loglik,
                                 linearized_residuals, dot};
  return table;
}

}  // namespace ilpcm::kernels
