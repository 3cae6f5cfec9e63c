#pragma once

// Dyad-level inner loops of the sampler. Every kernel has a scalar reference
// implementation; vectorized variants must agree with it to rounding error
// (see tests/test_kernels.cpp). A table is picked once per chain, either by
// name or by probing the CPU.

#include <cstddef>
#include <string_view>
#include <vector>

namespace ilpcm::kernels {

struct KernelTable {
  const char* name;

  // out[j] = sum_r (z[r*n + i] - z[r*n + j])^2 for j in [0, n). Coordinates
  // are dimension-major (one contiguous column of length n per dimension).
  void (*squared_distances)(const double* z, std::size_t n, std::size_t p, std::size_t i,
                            double* out);

  // sum_j s[j] * eta_j - mult * softplus(eta_j), eta_j = alpha - beta * d[j].
  // s holds y_ij + y_ji for directed views (mult = 2) or y_ij (mult = 1).
  double (*dyad_loglik)(const double* s, const double* d, std::size_t len, double alpha,
                        double beta, double mult);

  // c[j] = s[j] - mult * w_j with w_j = 1 if alpha - beta * d[j] > 0 else 0.
  // Returns sum_j |c[j]|.
  double (*linearized_residuals)(const double* s, const double* d, std::size_t len,
                                 double alpha, double beta, double mult, double* c);

  double (*dot)(const double* a, const double* b, std::size_t len);
};

const KernelTable& scalar();

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2();

// Widest table the running CPU supports.
const KernelTable& best();

// "auto", "scalar" or "avx2". Throws UsageError for unknown or unsupported
// names.
const KernelTable& select(std::string_view name);

// Names of all tables usable on this machine, scalar first.
std::vector<std::string_view> available();

}  // namespace ilpcm::kernels
