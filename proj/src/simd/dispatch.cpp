#include "gradlab/simd/kernels.hpp"

#include <cstring>

namespace gradlab::simd {

#ifdef GRADLAB_BUILD_AVX2
const Kernels* avx2_kernels_impl();
#endif

const Kernels* avx2_kernels() {
#ifdef GRADLAB_BUILD_AVX2
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return avx2_kernels_impl();
#endif
  return nullptr;
}

namespace {
const Kernels* g_active = nullptr;
}

const Kernels& active() {
  if (!g_active) {
    const Kernels* k = avx2_kernels();
    g_active = k ? k : &scalar_kernels();
  }
  return *g_active;
}

bool force(const char* name) {
  if (std::strcmp(name, "scalar") == 0) {
    g_active = &scalar_kernels();
    return true;
  }
  if (std::strcmp(name, "avx2") == 0) {
    const Kernels* k = avx2_kernels();
    if (!k) return false;
    g_active = k;
    return true;
  }
  return false;
}

}  // namespace gradlab::simd
