// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the runtime CPU check in dispatch.cpp.

#include "ilpcm/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <cstdint>

namespace ilpcm::kernels {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d vabs(__m256d x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

// exp(x) for x <= 0. Cody-Waite reduction and the Cephes (3,4) Pade form;
// inputs below -700 are clamped, where exp() is already below 1e-304.
inline __m256d exp_nonpositive(__m256d x) {
  x = _mm256_max_pd(x, _mm256_set1_pd(-700.0));
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d k = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
  x = _mm256_fnmadd_pd(k, c1, x);
  x = _mm256_fnmadd_pd(k, c2, x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.26177193074810590878e-4), xx,
                              _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_fmadd_pd(_mm256_set1_pd(3.00198505138664455042e-6), xx,
                              _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009e0));
  __m256d r = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  r = _mm256_fmadd_pd(_mm256_set1_pd(2.0), r, _mm256_set1_pd(1.0));

  // 2^k, k in [-1010, 0]: always a normal number.
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  __m256i e = _mm256_cvtepi32_epi64(k32);
  e = _mm256_slli_epi64(_mm256_add_epi64(e, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(r, _mm256_castsi256_pd(e));
}

// log(w) for w in [1, 2]; Cephes rational approximation on the mantissa.
inline __m256d log_one_to_two(__m256d w) {
  const __m256i bits = _mm256_castpd_si256(w);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i half_exp = _mm256_set1_epi64x(0x3FE0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_exp));
  // frexp exponent: 1 on [1, 2), 2 at w == 2.
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d e = _mm256_add_pd(one, _mm256_and_pd(_mm256_cmp_pd(w, _mm256_set1_pd(2.0), _CMP_GE_OQ), one));

  const __m256d sqrth = _mm256_set1_pd(0.70710678118654752440);
  const __m256d small = _mm256_cmp_pd(m, sqrth, _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  // x = 2m - 1 when m < sqrt(1/2), else m - 1
  const __m256d m2 = _mm256_add_pd(m, m);
  __m256d x = _mm256_sub_pd(_mm256_blendv_pd(m, m2, small), one);

  const __m256d z = _mm256_mul_pd(x, x);
  __m256d p = _mm256_fmadd_pd(_mm256_set1_pd(1.01875663804580931796e-4), x,
                              _mm256_set1_pd(4.97494994976747001425e-1));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.70579119878881725854e0));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.44989225341610930846e1));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.79368678507819816313e1));
  p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(7.70838733755885391666e0));
  __m256d q = _mm256_add_pd(x, _mm256_set1_pd(1.12873587189167450590e1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(4.52279145837532221105e1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(8.29875266912776603211e1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(7.11544750618563894466e1));
  q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(2.31251620126765340583e1));

  __m256d y = _mm256_mul_pd(x, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
  y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
  __m256d out = _mm256_add_pd(x, y);
  return _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), out);
}

// log1p(u) for u in [0, 1], with the Kahan correction u / ((1+u) - 1).
inline __m256d log1p_unit(__m256d u) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d w = _mm256_add_pd(one, u);
  const __m256d wm1 = _mm256_sub_pd(w, one);
  const __m256d exact = _mm256_cmp_pd(wm1, _mm256_setzero_pd(), _CMP_EQ_OQ);
  const __m256d safe = _mm256_blendv_pd(wm1, one, exact);
  const __m256d corrected = _mm256_mul_pd(log_one_to_two(w), _mm256_div_pd(u, safe));
  return _mm256_blendv_pd(corrected, u, exact);
}

inline __m256d softplus(__m256d x) {
  const __m256d neg_abs = _mm256_sub_pd(_mm256_setzero_pd(), vabs(x));
  return _mm256_add_pd(_mm256_max_pd(x, _mm256_setzero_pd()),
                       log1p_unit(exp_nonpositive(neg_abs)));
}

inline double softplus_scalar(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void squared_distances(const double* z, std::size_t n, std::size_t p, std::size_t i,
                       double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t r = 0; r < p; ++r) {
      const double* col = z + r * n;
      const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(col[i]), _mm256_loadu_pd(col + j));
      acc = _mm256_fmadd_pd(diff, diff, acc);
    }
    _mm256_storeu_pd(out + j, acc);
  }
  for (; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t r = 0; r < p; ++r) {
      const double diff = z[r * n + i] - z[r * n + j];
      acc += diff * diff;
    }
    out[j] = acc;
  }
}

double dyad_loglik(const double* s, const double* d, std::size_t len, double alpha,
                   double beta, double mult) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vm = _mm256_set1_pd(mult);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    const __m256d eta = _mm256_fnmadd_pd(vb, _mm256_loadu_pd(d + j), va);
    const __m256d term = _mm256_fnmadd_pd(vm, softplus(eta), _mm256_mul_pd(_mm256_loadu_pd(s + j), eta));
    acc = _mm256_add_pd(acc, term);
  }
  double total = hsum(acc);
  for (; j < len; ++j) {
    const double eta = alpha - beta * d[j];
    total += s[j] * eta - mult * softplus_scalar(eta);
  }
  return total;
}

double linearized_residuals(const double* s, const double* d, std::size_t len, double alpha,
                            double beta, double mult, double* c) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d vm = _mm256_set1_pd(mult);
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    const __m256d eta = _mm256_fnmadd_pd(vb, _mm256_loadu_pd(d + j), va);
    const __m256d w = _mm256_and_pd(_mm256_cmp_pd(eta, _mm256_setzero_pd(), _CMP_GT_OQ), vm);
    const __m256d cj = _mm256_sub_pd(_mm256_loadu_pd(s + j), w);
    _mm256_storeu_pd(c + j, cj);
    acc = _mm256_add_pd(acc, vabs(cj));
  }
  double total = hsum(acc);
  for (; j < len; ++j) {
    const double w = (alpha - beta * d[j] > 0.0) ? 1.0 : 0.0;
    c[j] = s[j] - mult * w;
    total += std::fabs(c[j]);
  }
  return total;
}

double dot(const double* a, const double* b, std::size_t len) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j), acc);
  }
  double total = hsum(acc);
  for (; j < len; ++j) total += a[j] * b[j];
  return total;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", squared_distances, dyad_loglik, linearized_residuals,
                                 dot};
  return table;
}

}  // namespace ilpcm::kernels
