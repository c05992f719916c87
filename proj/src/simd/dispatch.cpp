#include <cstdlib>
#include <string_view>

#include "varic/simd/kernels.hpp"

namespace varic::simd {

#ifdef VARIC_HAVE_AVX2
const KernelTable& avx2_table();
#endif

const KernelTable* avx2_kernels() {
#ifdef VARIC_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = [] () -> const KernelTable& {
    const char* env = std::getenv("VARIC_SIMD");
    const std::string_view choice = env ? env : "";
    if (choice == "scalar") return scalar_kernels();
    if (const auto* avx2 = avx2_kernels()) return *avx2;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace varic::simd
