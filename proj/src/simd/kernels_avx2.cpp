// Compiled with -mavx2; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>

#include "varic/simd/kernels.hpp"

namespace varic::simd {

namespace {

// exp(x) for x <= 1, flushing results below 2^-1022 to zero. Range reduction
// x = k ln2 + r with a two-part ln2, then the rational approximation
// exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)) on |r| <= ln2 / 2.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d lower = _mm256_set1_pd(-708.0);

  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);

  const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(k, ln2_hi));
  r = _mm256_sub_pd(r, _mm256_mul_pd(k, ln2_lo));

  const __m256d r2 = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_add_pd(_mm256_mul_pd(p, r2), _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_add_pd(_mm256_mul_pd(p, r2), _mm256_set1_pd(9.99999999999999999910e-1));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_add_pd(_mm256_mul_pd(q, r2), _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_add_pd(_mm256_mul_pd(q, r2), _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_add_pd(_mm256_mul_pd(q, r2), _mm256_set1_pd(2.00000000000000000009e0));
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));

  // 2^k through the exponent field; k is integral and in [-1022, 2].
  const __m256d magic = _mm256_set1_pd(0x1.8p52);
  __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(k, magic)), _mm256_castpd_si256(magic));
  bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, e);
}

inline double horizontal_sum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void norms(const double* offsets, std::size_t stride, int n, std::size_t count, double* r) {
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (int c = 0; c < n; ++c) {
      const __m256d u = _mm256_loadu_pd(offsets + c * stride + j);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(u, u));
    }
    _mm256_storeu_pd(r + j, _mm256_sqrt_pd(acc));
  }
  for (; j < count; ++j) {
    double acc = 0.0;
    for (int c = 0; c < n; ++c) {
      const double u = offsets[c * stride + j];
      acc += u * u;
    }
    r[j] = std::sqrt(acc);
  }
}

void bump_weights(const double* r, const double* mass, std::size_t count, double inv_eps, int n, double* weight,
                  double* mass_xi) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d minus_two = _mm256_set1_pd(-2.0);
  const __m256d scale = _mm256_set1_pd(inv_eps);
  const __m256d dim = _mm256_set1_pd(static_cast<double>(n));
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    const __m256d rv = _mm256_loadu_pd(r + j);
    const __m256d m = _mm256_loadu_pd(mass + j);
    const __m256d s = _mm256_mul_pd(rv, scale);
    const __m256d inside = _mm256_cmp_pd(s, one, _CMP_LT_OQ);
    // Outside the support use q = 1 so nothing overflows; masked below.
    const __m256d q = _mm256_blendv_pd(one, _mm256_sub_pd(one, _mm256_mul_pd(s, s)), inside);
    const __m256d rho = exp_pd(_mm256_sub_pd(one, _mm256_div_pd(one, q)));
    const __m256d drho = _mm256_mul_pd(rho, _mm256_div_pd(_mm256_mul_pd(minus_two, s), _mm256_mul_pd(q, q)));
    const __m256d positive = _mm256_cmp_pd(rv, zero, _CMP_GT_OQ);
    const __m256d safe_r = _mm256_blendv_pd(one, rv, positive);
    const __m256d w = _mm256_div_pd(_mm256_mul_pd(m, drho), safe_r);
    const __m256d mx =
        _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(_mm256_sub_pd(zero, s), drho), dim));
    _mm256_storeu_pd(weight + j, _mm256_and_pd(w, _mm256_and_pd(inside, positive)));
    _mm256_storeu_pd(mass_xi + j, _mm256_and_pd(mx, inside));
  }
  if (j < count) scalar_kernels().bump_weights(r + j, mass + j, count - j, inv_eps, n, weight + j, mass_xi + j);
}

double sum(const double* a, std::size_t count) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + j));
  double total = horizontal_sum(acc);
  for (; j < count; ++j) total += a[j];
  return total;
}

double dot(const double* a, const double* b, std::size_t count) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= count; j += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
  }
  double total = horizontal_sum(acc);
  for (; j < count; ++j) total += a[j] * b[j];
  return total;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", norms, bump_weights, sum, dot};
  return table;
}

}  // namespace varic::simd
