#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "gradlab/torus.hpp"

using namespace gradlab;

TEST_CASE("lattice indexing round-trips and wraps") {
  TorusLattice lat(2, 8);
  CHECK(lat.sites() == 64);
  for (std::int64_t i = 0; i < lat.sites(); i++)
    CHECK(lat.index(lat.coords(i)) == i);
  // periodic wrap: coordinates shifted by L map to the same site
  Coords c{3, -2, 0, 0};
  Coords cw{3 + 8, -2 - 8, 0, 0};
  CHECK(lat.index(c) == lat.index(cw));
}

TEST_CASE("canonical coordinates live in [-L/2, L/2)") {
  TorusLattice lat(2, 6);
  for (std::int64_t i = 0; i < lat.sites(); i++) {
    Coords c = lat.coords(i);
    for (int a = 0; a < 2; a++) {
      CHECK(c[a] >= -3);
      CHECK(c[a] < 3);
    }
  }
}

TEST_CASE("neighbors are inverse of each other") {
  TorusLattice lat(2, 4);
  for (std::int64_t i = 0; i < lat.sites(); i++)
    for (int a = 0; a < 2; a++) {
      CHECK(lat.neighbor(lat.neighbor(i, a, +1), a, -1) == i);
      CHECK(lat.neighbor(i, a, +1) != i);
    }
}

TEST_CASE("invalid lattices are rejected") {
  CHECK_THROWS_AS(TorusLattice(2, 3), std::domain_error);   // odd side
  CHECK_THROWS_AS(TorusLattice(2, 0), std::domain_error);
  CHECK_THROWS_AS(TorusLattice(0, 4), std::domain_error);
  CHECK_THROWS_AS(TorusLattice(5, 4), std::domain_error);   // above kMaxDim
}

TEST_CASE("periodic distance minimizes over images") {
  TorusLattice lat(2, 8);
  Coords a{0, 0, 0, 0}, b{7, 0, 0, 0};
  // 7 == -1 mod 8, distance 1
  CHECK(lat.periodic_distance(lat.index(a), lat.index(b)) == doctest::Approx(1.0));
  Coords c{4, 4, 0, 0};
  CHECK(lat.periodic_distance(lat.index(a), lat.index(c)) ==
        doctest::Approx(std::sqrt(32.0)));
  CHECK(lat.periodic_distance(lat.index(b), lat.index(b)) == doctest::Approx(0.0));
}

TEST_CASE("weights validate their exponent range") {
  CHECK_THROWS_AS(Weight::one_point(2.0).validate(2), std::domain_error);
  CHECK_THROWS_AS(Weight::one_point(-2.0).validate(2), std::domain_error);
  CHECK_NOTHROW(Weight::one_point(1.5).validate(2));
  CHECK_THROWS_AS(Weight::two_point(0.5, 2.5).validate(2), std::domain_error);
  CHECK_NOTHROW(Weight::two_point(0.5, -0.75).validate(2));
  TorusLattice lat(2, 8);
  Weight w = Weight::one_point(0.5);
  Coords y{3, 0, 0, 0};
  CHECK(w(lat, lat.index(y)) == doctest::Approx(std::pow(4.0, 0.5)));
  Weight w2 = Weight::two_point(0.5, -0.75);
  Coords z{3, 1, 0, 0};
  double expect = std::pow(1.0 + std::sqrt(10.0), 0.5) *
                  std::pow(1.0 + std::sqrt(2.0), -0.75);
  // gamma((3,1),(4,0)) = sqrt(2)
  Coords y2{4, 0, 0, 0};
  CHECK(w2(lat, lat.index(z), lat.index(y2)) == doctest::Approx(expect));
}

TEST_CASE("translate shifts fields forward") {
  TorusLattice lat(1, 4);
  LatticeField f(lat);
  for (std::int64_t i = 0; i < 4; i++) f.v[i] = static_cast<double>(i);
  Coords x{1, 0, 0, 0};
  LatticeField g = translate(f, x);
  // (tau_x f)(z) = f(x + z)
  CHECK(g.v[0] == doctest::Approx(1.0));
  CHECK(g.v[3] == doctest::Approx(0.0));
}

TEST_CASE("norms and dots agree with direct sums") {
  TorusLattice lat(2, 4);
  VectorField f(lat);
  double expect = 0.0;
  for (std::size_t i = 0; i < f.v.size(); i++) {
    f.v[i] = 0.1 * static_cast<double>(i) - 1.0;
    expect += f.v[i] * f.v[i];
  }
  CHECK(norm2(f) == doctest::Approx(expect));
  Weight w = Weight::one_point(0.3);
  double wexp = 0.0;
  for (int c = 0; c < 2; c++)
    for (std::int64_t i = 0; i < lat.sites(); i++)
      wexp += w(lat, i) * f.at(c, i) * f.at(c, i);
  CHECK(weighted_norm2(f, w) == doctest::Approx(wexp));
}

TEST_CASE("two-point fields enforce the memory cap") {
  TorusLattice big(2, 64);
  CHECK_THROWS_AS(TwoPointField(big, 2), std::length_error);
  TorusLattice ok(2, 8);
  TwoPointField f(ok, 4);
  CHECK(f.pairs() == 64 * 64);
  f.at(3, 5, 7) = 2.5;
  CHECK(f.comp(3)[5 * 64 + 7] == doctest::Approx(2.5));
}
