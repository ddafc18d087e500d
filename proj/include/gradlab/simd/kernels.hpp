#pragma once

#include <cstddef>

// Data-parallel inner-loop kernels.  A scalar reference implementation is
// always present; on x86-64 an AVX2/FMA variant is selected at runtime when
// the CPU supports it.  The two variants are equivalence-tested against each
// other in test_simd.cpp.

namespace gradlab::simd {

struct Kernels {
  const char* name;
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sumsq)(const double* x, std::size_t n);
  // sum_i w[i] * x[i]^2
  double (*weighted_sumsq)(const double* w, const double* x, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  // s[i] = sin(x[i]), c[i] = cos(x[i])
  void (*sincos)(const double* x, double* s, double* c, std::size_t n);
};

const Kernels& scalar_kernels();
const Kernels* avx2_kernels();  // nullptr when not built or not supported

// Currently active kernel set (auto-detected on first use).
const Kernels& active();

// Force a specific variant by name ("scalar", "avx2").  Returns false if the
// variant is unavailable on this machine.
bool force(const char* name);

}  // namespace gradlab::simd
