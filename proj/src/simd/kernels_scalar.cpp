#include <cmath>

#include "varic/simd/kernels.hpp"

namespace varic::simd {

namespace {

void norms(const double* offsets, std::size_t stride, int n, std::size_t count, double* r) {
  for (std::size_t j = 0; j < count; ++j) {
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
  for (std::size_t j = 0; j < count; ++j) {
    const double s = r[j] * inv_eps;
    if (s >= 1.0) {
      weight[j] = 0.0;
      mass_xi[j] = 0.0;
      continue;
    }
    const double q = 1.0 - s * s;
    const double rho = std::exp(1.0 - 1.0 / q);
    const double drho = rho * (-2.0 * s / (q * q));
    weight[j] = r[j] > 0.0 ? mass[j] * drho / r[j] : 0.0;
    mass_xi[j] = mass[j] * (-s * drho / n);
  }
}

double sum(const double* a, std::size_t count) {
  double acc = 0.0;
  for (std::size_t j = 0; j < count; ++j) acc += a[j];
  return acc;
}

double dot(const double* a, const double* b, std::size_t count) {
  double acc = 0.0;
  for (std::size_t j = 0; j < count; ++j) acc += a[j] * b[j];
  return acc;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", norms, bump_weights, sum, dot};
  return table;
}

}  // namespace varic::simd
