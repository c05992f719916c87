#pragma once

#include <cstddef>
#include <string_view>

namespace varic::simd {

/// Batched inner loops of the estimators. Every variant computes the same
/// quantities; the scalar table is the reference and the vector tables are
/// checked against it to a few ulps.
///
/// Offsets are structure-of-arrays: coordinate c of neighbor j lives at
/// offsets[c * stride + j].
struct KernelTable {
  std::string_view name;

  // r[j] = sqrt(sum_c offsets[c * stride + j]^2)
  void (*norms)(const double* offsets, std::size_t stride, int n, std::size_t count, double* r);

  // For s = r[j] * inv_eps and the bump profile rho(s) = exp(1 - 1/(1 - s^2)):
  //   weight[j] = mass[j] * rho'(s) / r[j]       (0 when s >= 1 or r[j] == 0)
  //   mass_xi[j] = mass[j] * (-s rho'(s)) / n     (0 when s >= 1)
  void (*bump_weights)(const double* r, const double* mass, std::size_t count, double inv_eps, int n,
                       double* weight, double* mass_xi);

  double (*sum)(const double* a, std::size_t count);
  double (*dot)(const double* a, const double* b, std::size_t count);
};

const KernelTable& scalar_kernels();

/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

/// Table used by the estimators: the widest supported variant, unless the
/// environment variable VARIC_SIMD is set to "scalar" (or "avx2").
/// Resolved once per process.
const KernelTable& active_kernels();

}  // namespace varic::simd
