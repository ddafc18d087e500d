#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gradlab/discrete_calculus.hpp"
#include "gradlab/greens.hpp"
#include "gradlab/torus.hpp"

using namespace gradlab;

namespace {

LatticeField random_field(const TorusLattice& lat, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LatticeField f(lat);
  for (auto& v : f.v) v = g(rng);
  return f;
}

VectorField random_vfield(const TorusLattice& lat, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VectorField f(lat);
  for (auto& v : f.v) v = g(rng);
  return f;
}

// dense oracle for the periodic Green's function: assemble div_star grad + rho
// as a matrix and solve against the delta at 0
LatticeField dense_green(const TorusLattice& lat, double rho) {
  const auto n = lat.sites();
  Eigen::MatrixXd A(n, n);
  for (std::int64_t j = 0; j < n; j++) {
    LatticeField e(lat);
    e.v[j] = 1.0;
    LatticeField le = laplacian(e);
    for (std::int64_t i = 0; i < n; i++) A(i, j) = le.v[i] + rho * (i == j ? 1.0 : 0.0);
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[0] = 1.0;
  Eigen::VectorXd x = A.partialPivLu().solve(b);
  LatticeField G(lat);
  for (std::int64_t i = 0; i < n; i++) G.v[i] = x[i];
  return G;
}

}  // namespace

TEST_CASE("tiny closed-form Green's function, d=1 L=2") {
  TorusLattice lat(1, 2);
  LatticeField G = periodic_green(lat, 1.0);
  CHECK(G.v[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(G.v[1] == doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("Green's function matches a dense solve") {
  for (double rho : {0.1, 1.0}) {
    TorusLattice lat(2, 6);
    LatticeField G = periodic_green(lat, rho);
    LatticeField Gd = dense_green(lat, rho);
    for (std::int64_t i = 0; i < lat.sites(); i++)
      CHECK(G.v[i] == doctest::Approx(Gd.v[i]).epsilon(1e-12));
  }
}

TEST_CASE("total mass of G is 1/rho") {
  TorusLattice lat(2, 16);
  for (double rho : {1e-2, 1e-4}) {
    LatticeField G = periodic_green(lat, rho);
    double s = 0.0;
    for (double v : G.v) s += v;
    CHECK(s == doctest::Approx(1.0 / rho).epsilon(1e-10));
  }
}

TEST_CASE("green_gradient equals grad of periodic_green") {
  TorusLattice lat(2, 8);
  LatticeField G = periodic_green(lat, 0.05);
  VectorField g1 = green_gradient(lat, 0.05);
  VectorField g2 = grad(G);
  for (std::size_t i = 0; i < g1.v.size(); i++)
    CHECK(g1.v[i] == doctest::Approx(g2.v[i]).epsilon(1e-12));
}

TEST_CASE("resolvent_solve inverts the shifted operator") {
  TorusLattice lat(2, 8);
  LatticeField f = random_field(lat, 12);
  double c = 1.7, shift = 0.3;
  LatticeField u = resolvent_solve(lat, c, shift, f);
  LatticeField lu = laplacian(u);
  for (std::int64_t i = 0; i < lat.sites(); i++)
    CHECK(c * lu.v[i] + shift * u.v[i] == doctest::Approx(f.v[i]).epsilon(1e-11));
}

TEST_CASE("apply_T matches real-space convolution with grad div_star G") {
  for (int L : {4, 8}) {
    for (double rho : {0.1, 1.0}) {
      TorusLattice lat(2, L);
      const auto n = lat.sites();
      LatticeField G = periodic_green(lat, rho);
      // kernel K_ab = grad_a div_star_b G
      std::vector<std::vector<double>> K(4, std::vector<double>(n));
      std::vector<double> tmp(n);
      for (int b = 0; b < 2; b++) {
        axis_div_star(lat, b, G.v.data(), tmp.data(), 1);
        for (int a = 0; a < 2; a++)
          axis_grad(lat, a, tmp.data(), K[a * 2 + b].data(), 1);
      }
      VectorField h = random_vfield(lat, 77 + L);
      SpectralKernel T(lat, SpectralKernel::Kind::T, rho);
      VectorField fast = apply_T(T, h);
      // direct O(N^2) periodic convolution
      VectorField slow(lat);
      for (int a = 0; a < 2; a++)
        for (std::int64_t x = 0; x < n; x++) {
          Coords cx = lat.coords(x);
          double s = 0.0;
          for (int b = 0; b < 2; b++)
            for (std::int64_t y = 0; y < n; y++) {
              Coords cy = lat.coords(y);
              Coords diff{};
              for (int t = 0; t < 2; t++) diff[t] = cx[t] - cy[t];
              s += K[a * 2 + b][lat.index(diff)] * h.at(b, y);
            }
          slow.at(a, x) = s;
        }
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < fast.v.size(); i++) {
        double d = fast.v[i] - slow.v[i];
        num += d * d;
        den += slow.v[i] * slow.v[i];
      }
      CHECK(std::sqrt(num / den) < 1e-10);
    }
  }
}

TEST_CASE("exact operator norm formula for even L") {
  TorusLattice lat(2, 8);
  for (double rho : {0.5, 1.0, 4.0})
    CHECK(exact_T_norm(lat, rho) == doctest::Approx(8.0 / (8.0 + rho)).epsilon(1e-14));
  // exhaustive mode scan cross-check
  double rho = 1.0;
  double best = 0.0;
  for (int n0 = 0; n0 < 8; n0++)
    for (int n1 = 0; n1 < 8; n1++) {
      double k0 = 2.0 * std::numbers::pi * n0 / 8;
      double k1 = 2.0 * std::numbers::pi * n1 / 8;
      double d2 = 2.0 * (1 - std::cos(k0)) + 2.0 * (1 - std::cos(k1));
      best = std::max(best, d2 / (d2 + rho));
    }
  CHECK(exact_T_norm(lat, rho) == doctest::Approx(best).epsilon(1e-14));
}

TEST_CASE("power iteration recovers the norm of a diagonal operator") {
  std::vector<double> w = {1.0, 2.0, 0.5, 4.0, 1.5};
  std::vector<double> diag = {0.2, -0.9, 0.5, 0.1, 0.7};
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); i++) out[i] = diag[i] * in[i];
  };
  PowerIterReport rep = weighted_operator_norm(apply, w, 2000, 5);
  CHECK(rep.converged);
  CHECK(rep.norm == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("unweighted estimate agrees with the exact norm") {
  TorusLattice lat(2, 8);
  double rho = 1.0;
  PowerIterReport rep = estimate_weighted_norm(CzOperator::T, lat, rho,
                                               Weight::one_point(0.0), 50000, 11);
  CHECK(rep.converged);
  CHECK(std::abs(rep.norm - 8.0 / 9.0) < 1e-6);
}

TEST_CASE("weighted norm agrees with a dense SVD on a small lattice") {
  TorusLattice lat(2, 6);
  double rho = 0.7;
  Weight w = Weight::one_point(0.5);
  const auto n = lat.sites() * 2;
  // dense matrix of W^{1/2} T W^{-1/2}
  std::vector<double> sqw(n);
  for (int c = 0; c < 2; c++)
    for (std::int64_t i = 0; i < lat.sites(); i++)
      sqw[c * lat.sites() + i] = std::sqrt(w(lat, i));
  SpectralKernel T(lat, SpectralKernel::Kind::T, rho);
  Eigen::MatrixXd A(n, n);
  for (std::int64_t j = 0; j < n; j++) {
    VectorField e(lat);
    e.v[j] = 1.0 / sqw[j];
    VectorField out = apply_T(T, e);
    for (std::int64_t i = 0; i < n; i++) A(i, j) = sqw[i] * out.v[i];
  }
  double svd_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues()(0);
  PowerIterReport rep = estimate_weighted_norm(CzOperator::T, lat, rho, w, 50000, 3);
  CHECK(rep.converged);
  CHECK(rep.norm == doctest::Approx(svd_norm).epsilon(1e-7));
}

TEST_CASE("two-point operators match a naive DFT oracle") {
  TorusLattice lat(2, 4);
  const auto n = lat.sites();
  const auto np = n * n;
  double rho = 0.9;
  TwoPointField h(lat, 4);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (auto& v : h.v) v = g(rng);

  // naive DFT over the pair index
  using cd = std::complex<double>;
  auto mode_sym = [&](std::int64_t m, int axis) {
    Coords c{};
    std::int64_t rem = m;
    for (int a = 1; a >= 0; a--) {
      c[a] = static_cast<int>(rem % 4);
      rem /= 4;
    }
    double k = 2.0 * std::numbers::pi * c[axis] / 4;
    return cd(std::cos(k) - 1.0, std::sin(k));
  };
  std::vector<std::vector<cd>> hat(4, std::vector<cd>(np, cd(0, 0)));
  for (int comp = 0; comp < 4; comp++)
    for (std::int64_t my = 0; my < n; my++)
      for (std::int64_t mz = 0; mz < n; mz++) {
        cd acc(0, 0);
        for (std::int64_t y = 0; y < n; y++)
          for (std::int64_t z = 0; z < n; z++) {
            Coords cy = lat.coords(y), cz = lat.coords(z), cmy = lat.coords(my),
                   cmz = lat.coords(mz);
            double ph = 0.0;
            for (int a = 0; a < 2; a++)
              ph -= 2.0 * std::numbers::pi *
                    (cmy[a] * cy[a] + cmz[a] * cz[a]) / 4.0;
            acc += h.comp(comp)[y * n + z] * cd(std::cos(ph), std::sin(ph));
          }
        hat[comp][my * n + mz] = acc;
      }
  // apply the T1 multiplier (y block) and the tensor multiplier in mode space
  std::vector<std::vector<cd>> t1hat(4, std::vector<cd>(np)),
      txhat(4, std::vector<cd>(np));
  for (std::int64_t my = 0; my < n; my++)
    for (std::int64_t mz = 0; mz < n; mz++) {
      cd Dy[2] = {mode_sym(my, 0), mode_sym(my, 1)};
      cd Dz[2] = {mode_sym(mz, 0), mode_sym(mz, 1)};
      double dy2 = std::norm(Dy[0]) + std::norm(Dy[1]);
      double dz2 = std::norm(Dz[0]) + std::norm(Dz[1]);
      std::int64_t p = my * n + mz;
      for (int a = 0; a < 2; a++) {
        cd s1(0, 0), sx(0, 0);
        for (int b = 0; b < 2; b++) {
          s1 += std::conj(Dy[b]) * hat[b][p];
          sx += std::conj(Dy[b]) * hat[b][p];
        }
        t1hat[a][p] = Dy[a] * s1 / (dy2 + dz2 + rho);
        txhat[a][p] = Dy[a] * sx / (dy2 + rho);
      }
      for (int a = 2; a < 4; a++) {
        t1hat[a][p] = cd(0, 0);       // T1 zeroes the z block
        txhat[a][p] = hat[a][p];      // tensor-identity passes it through
      }
    }
  // inverse naive DFT and compare
  SpectralKernel k1(lat, SpectralKernel::Kind::T1, rho);
  SpectralKernel kt(lat, SpectralKernel::Kind::T, rho);
  TwoPointField f1 = apply_T1(k1, h);
  TwoPointField fx = apply_T_tensor_identity(kt, h);
  for (int comp = 0; comp < 4; comp++)
    for (std::int64_t y = 0; y < n; y++)
      for (std::int64_t z = 0; z < n; z++) {
        cd a1(0, 0), ax(0, 0);
        for (std::int64_t my = 0; my < n; my++)
          for (std::int64_t mz = 0; mz < n; mz++) {
            Coords cy = lat.coords(y), cz = lat.coords(z), cmy = lat.coords(my),
                   cmz = lat.coords(mz);
            double ph = 0.0;
            for (int a = 0; a < 2; a++)
              ph += 2.0 * std::numbers::pi *
                    (cmy[a] * cy[a] + cmz[a] * cz[a]) / 4.0;
            cd e(std::cos(ph), std::sin(ph));
            a1 += t1hat[comp][my * n + mz] * e;
            ax += txhat[comp][my * n + mz] * e;
          }
        a1 /= static_cast<double>(np);
        ax /= static_cast<double>(np);
        CHECK(f1.comp(comp)[y * n + z] == doctest::Approx(a1.real()).epsilon(1e-9));
        CHECK(fx.comp(comp)[y * n + z] == doctest::Approx(ax.real()).epsilon(1e-9));
      }
}

TEST_CASE("T1 swaps correctly onto the z block") {
  TorusLattice lat(2, 4);
  SpectralKernel k1(lat, SpectralKernel::Kind::T1, 0.5);
  TwoPointField h(lat, 4);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (auto& v : h.v) v = g(rng);
  TwoPointField on_z = apply_T1(k1, h, true);
  // swapping (y, z) and blocks must reduce T2 to T1
  TwoPointField hs(lat, 4);
  const auto n = lat.sites();
  for (int c = 0; c < 4; c++) {
    int cs = (c + 2) % 4;
    for (std::int64_t y = 0; y < n; y++)
      for (std::int64_t z = 0; z < n; z++)
        hs.comp(cs)[z * n + y] = h.comp(c)[y * n + z];
  }
  TwoPointField on_y = apply_T1(k1, hs, false);
  for (int c = 0; c < 4; c++) {
    int cs = (c + 2) % 4;
    for (std::int64_t y = 0; y < n; y++)
      for (std::int64_t z = 0; z < n; z++)
        CHECK(on_z.comp(c)[y * n + z] ==
              doctest::Approx(on_y.comp(cs)[z * n + y]).epsilon(1e-11));
  }
}

TEST_CASE("invalid kernel parameters are rejected") {
  TorusLattice lat(2, 4);
  CHECK_THROWS_AS(SpectralKernel(lat, SpectralKernel::Kind::T, 0.0), std::domain_error);
  CHECK_THROWS_AS(SpectralKernel(lat, SpectralKernel::Kind::T, -1.0), std::domain_error);
  CHECK_THROWS_AS(estimate_weighted_norm(CzOperator::T, lat, 1.0,
                                         Weight::two_point(0.1, 0.1), 10, 1),
                  std::domain_error);
  CHECK_THROWS_AS(estimate_weighted_norm(CzOperator::T1, lat, 1.0,
                                         Weight::one_point(0.1), 10, 1),
                  std::domain_error);
}

TEST_CASE("decay report runs and produces finite weighted sups") {
  DecayReport rep = verify_decay(1e-2, 32, 2);
  CHECK(rep.L == 32);
  CHECK(rep.sup_grad > 0.0);
  CHECK(rep.sup_grad_div > 0.0);
  CHECK(rep.sup_grad2_div > 0.0);
  CHECK(rep.hq_sup > 0.0);
  CHECK(std::isfinite(rep.sup_grad + rep.sup_grad_div + rep.sup_grad2_div + rep.hq_sup));
}
