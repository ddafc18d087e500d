#include "gradlab/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace gradlab::simd {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; i++) acc += x[i] * y[i];
  return acc;
}

double sum_avx2(const double* x, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; i++) r += x[i];
  return r;
}

double sumsq_avx2(const double* x, std::size_t n) {
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    __m256d a = _mm256_loadu_pd(x + i);
    __m256d b = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double r = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; i++) r += x[i] * x[i];
  return r;
}

double weighted_sumsq_avx2(const double* w, const double* x, std::size_t n) {
  std::size_t i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(a, a), _mm256_loadu_pd(w + i), acc);
  }
  double r = hsum(acc);
  for (; i < n; i++) r += w[i] * x[i] * x[i];
  return r;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; i++) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
  std::size_t i = 0;
  __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; i++) x[i] *= a;
}

// sin/cos with Cephes-style argument reduction modulo pi/2 and degree-6
// minimax polynomials on [-pi/4, pi/4].  Accurate to ~1 ulp for the argument
// magnitudes that occur here (|x| < a few hundred); test_simd checks against
// libm at 1e-13 absolute.

const double kTwoOverPi = 6.36619772367581382433e-1;
// pi/2 split into three parts for extended-precision reduction
const double kDP1 = 2.0 * 7.85398125648498535156e-1;
const double kDP2 = 2.0 * 3.77489470793079817668e-8;
const double kDP3 = 2.0 * 2.69515142907905952645e-15;

const double kSinP[6] = {
    1.58962301576546568060e-10, -2.50507477628578072866e-8,
    2.75573136213857245213e-6,  -1.98412698295895385996e-4,
    8.33333333332211858878e-3,  -1.66666666666666307295e-1,
};
const double kCosP[6] = {
    -1.13585365213876817300e-11, 2.08757008419747316778e-9,
    -2.75573141792967388112e-7,  2.48015872888517179954e-5,
    -1.38888888888730564116e-3,  4.16666666666665929218e-2,
};

inline void sincos4(__m256d x, __m256d* sout, __m256d* cout) {
  // q = round(x * 2/pi); r = x - q*pi/2 in [-pi/4, pi/4]
  __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kDP1), x);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kDP2), r);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kDP3), r);

  __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(kSinP[0]);
  for (int i = 1; i < 6; i++)
    ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(kSinP[i]));
  // sin(r) = r + r*z*ps
  __m256d sin_r = _mm256_fmadd_pd(_mm256_mul_pd(r, z), ps, r);

  __m256d pc = _mm256_set1_pd(kCosP[0]);
  for (int i = 1; i < 6; i++)
    pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(kCosP[i]));
  // cos(r) = 1 - z/2 + z^2*pc
  __m256d cos_r = _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc,
                                  _mm256_fnmadd_pd(z, _mm256_set1_pd(0.5),
                                                   _mm256_set1_pd(1.0)));

  // quadrant selection from q mod 4
  __m128i qi = _mm256_cvtpd_epi32(q);
  __m128i qand1 = _mm_and_si128(qi, _mm_set1_epi32(1));
  __m128i qand2 = _mm_and_si128(qi, _mm_set1_epi32(2));
  __m256d swap_mask = _mm256_cvtepi32_pd(_mm_cmpeq_epi32(qand1, _mm_set1_epi32(1)));
  swap_mask = _mm256_cmp_pd(swap_mask, _mm256_setzero_pd(), _CMP_NEQ_OQ);
  __m256d neg2_mask = _mm256_cvtepi32_pd(_mm_cmpeq_epi32(qand2, _mm_set1_epi32(2)));
  neg2_mask = _mm256_cmp_pd(neg2_mask, _mm256_setzero_pd(), _CMP_NEQ_OQ);

  // q mod 4 == 0: (sin_r, cos_r); 1: (cos_r, -sin_r); 2: (-sin_r, -cos_r); 3: (-cos_r, sin_r)
  __m256d s = _mm256_blendv_pd(sin_r, cos_r, swap_mask);
  __m256d c = _mm256_blendv_pd(cos_r, sin_r, swap_mask);
  __m256d signbit = _mm256_set1_pd(-0.0);
  s = _mm256_xor_pd(s, _mm256_and_pd(neg2_mask, signbit));
  // cos negated for q mod 4 in {1, 2}
  __m256d cneg = _mm256_xor_pd(swap_mask, neg2_mask);
  c = _mm256_xor_pd(c, _mm256_and_pd(cneg, signbit));
  *sout = s;
  *cout = c;
}

void sincos_avx2(const double* x, double* s, double* c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vs, vc;
    sincos4(_mm256_loadu_pd(x + i), &vs, &vc);
    _mm256_storeu_pd(s + i, vs);
    _mm256_storeu_pd(c + i, vc);
  }
  for (; i < n; i++) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k = {
      "avx2",       dot_avx2,   sum_avx2,   sumsq_avx2,
      weighted_sumsq_avx2, axpy_avx2, scale_avx2, sincos_avx2,
  };
  return &k;
}

}  // namespace gradlab::simd
