#include "gradlab/simd/kernels.hpp"

#include <cmath>

namespace gradlab::simd {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; i++) acc += x[i] * y[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; i++) acc += x[i];
  return acc;
}

double sumsq_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; i++) acc += x[i] * x[i];
  return acc;
}

double weighted_sumsq_scalar(const double* w, const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; i++) acc += w[i] * x[i] * x[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; i++) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; i++) x[i] *= a;
}

void sincos_scalar(const double* x, double* s, double* c, std::size_t n) {
  for (std::size_t i = 0; i < n; i++) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar",        dot_scalar,   sum_scalar,   sumsq_scalar,
      weighted_sumsq_scalar, axpy_scalar, scale_scalar, sincos_scalar,
  };
  return k;
}

}  // namespace gradlab::simd
