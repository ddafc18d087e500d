#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "gradlab/simd/kernels.hpp"

using namespace gradlab;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels basic correctness") {
  const auto& k = simd::scalar_kernels();
  std::vector<double> x = {1.0, 2.0, 3.0};
  std::vector<double> y = {4.0, -1.0, 0.5};
  CHECK(k.dot(x.data(), y.data(), 3) == doctest::Approx(3.5));
  CHECK(k.sum(x.data(), 3) == doctest::Approx(6.0));
  CHECK(k.sumsq(x.data(), 3) == doctest::Approx(14.0));
  std::vector<double> w = {2.0, 1.0, 0.0};
  CHECK(k.weighted_sumsq(w.data(), x.data(), 3) == doctest::Approx(6.0));
  std::vector<double> z = y;
  k.axpy(2.0, x.data(), z.data(), 3);
  CHECK(z[0] == doctest::Approx(6.0));
  CHECK(z[2] == doctest::Approx(6.5));
  k.scale(0.5, z.data(), 3);
  CHECK(z[0] == doctest::Approx(3.0));
}

TEST_CASE("avx2 variant matches scalar on random data") {
  const auto* avx = simd::avx2_kernels();
  if (!avx) return;  // machine without AVX2
  const auto& ref = simd::scalar_kernels();
  for (std::size_t n : {1u, 3u, 4u, 7u, 8u, 63u, 64u, 1000u}) {
    auto x = random_vec(n, 11 + n);
    auto y = random_vec(n, 23 + n);
    auto w = random_vec(n, 31 + n);
    for (auto& v : w) v = std::abs(v);
    CHECK(avx->dot(x.data(), y.data(), n) ==
          doctest::Approx(ref.dot(x.data(), y.data(), n)).epsilon(1e-12));
    CHECK(avx->sum(x.data(), n) == doctest::Approx(ref.sum(x.data(), n)).epsilon(1e-12));
    CHECK(avx->sumsq(x.data(), n) ==
          doctest::Approx(ref.sumsq(x.data(), n)).epsilon(1e-12));
    CHECK(avx->weighted_sumsq(w.data(), x.data(), n) ==
          doctest::Approx(ref.weighted_sumsq(w.data(), x.data(), n)).epsilon(1e-12));
    auto z1 = y, z2 = y;
    ref.axpy(1.7, x.data(), z1.data(), n);
    avx->axpy(1.7, x.data(), z2.data(), n);
    for (std::size_t i = 0; i < n; i++) CHECK(z1[i] == doctest::Approx(z2[i]));
    ref.scale(-0.3, z1.data(), n);
    avx->scale(-0.3, z2.data(), n);
    for (std::size_t i = 0; i < n; i++) CHECK(z1[i] == doctest::Approx(z2[i]));
  }
}

TEST_CASE("vector sincos agrees with libm") {
  const auto* avx = simd::avx2_kernels();
  const auto& ref = simd::scalar_kernels();
  std::vector<double> xs;
  // dense sweep of the range the sampler actually uses, plus some outliers
  for (double t = -30.0; t <= 30.0; t += 0.0137) xs.push_back(t);
  for (double t : {0.0, 1e-12, -1e-12, 3.14159265358979, 100.0, -250.5}) xs.push_back(t);
  std::vector<double> s1(xs.size()), c1(xs.size()), s2(xs.size()), c2(xs.size());
  ref.sincos(xs.data(), s1.data(), c1.data(), xs.size());
  for (std::size_t i = 0; i < xs.size(); i++) {
    CHECK(s1[i] == doctest::Approx(std::sin(xs[i])).epsilon(1e-15));
    CHECK(c1[i] == doctest::Approx(std::cos(xs[i])).epsilon(1e-15));
  }
  if (!avx) return;
  avx->sincos(xs.data(), s2.data(), c2.data(), xs.size());
  for (std::size_t i = 0; i < xs.size(); i++) {
    CHECK(std::abs(s2[i] - std::sin(xs[i])) < 1e-13);
    CHECK(std::abs(c2[i] - std::cos(xs[i])) < 1e-13);
  }
}

TEST_CASE("dispatch selects a working kernel set and can be forced") {
  const auto& act = simd::active();
  CHECK(act.dot != nullptr);
  CHECK(simd::force("scalar"));
  CHECK(std::string(simd::active().name) == "scalar");
  if (simd::avx2_kernels()) {
    CHECK(simd::force("avx2"));
    CHECK(std::string(simd::active().name) == "avx2");
  } else {
    CHECK_FALSE(simd::force("avx2"));
  }
  CHECK_FALSE(simd::force("sse9"));
  simd::force(simd::avx2_kernels() ? "avx2" : "scalar");
}
