#include "gradlab/greens.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "gradlab/discrete_calculus.hpp"
#include "gradlab/fft.hpp"
#include "gradlab/simd/kernels.hpp"

namespace gradlab {

namespace {

std::vector<int> lattice_dims(const TorusLattice& lat, int copies = 1) {
  std::vector<int> dims(static_cast<std::size_t>(lat.dim()) * copies, lat.side());
  return dims;
}

void mode_coords(const TorusLattice& lat, std::int64_t m, int* n) {
  for (int a = 0; a < lat.dim(); a++)
    n[a] = static_cast<int>((m / lat.stride(a)) % lat.side());
}

}  // namespace

SpectralKernel::SpectralKernel(const TorusLattice& l, Kind k, double rho_)
    : lat(l), kind(k), rho(rho_) {
  if (rho <= 0.0) throw std::domain_error("SpectralKernel: rho must be positive");
}

LatticeField periodic_green(const TorusLattice& lat, double rho) {
  if (rho <= 0.0) throw std::domain_error("periodic_green: rho must be positive");
  const auto n = lat.sites();
  std::vector<cplx> buf(n);
  for (std::int64_t m = 0; m < n; m++)
    buf[m] = 1.0 / (laplace_symbol(lat, m) + rho);
  fft(buf, lattice_dims(lat), +1);
  LatticeField g(lat);
  for (std::int64_t i = 0; i < n; i++) g.v[i] = buf[i].real();
  return g;
}

VectorField green_gradient(const TorusLattice& lat, double rho) {
  if (rho <= 0.0) throw std::domain_error("green_gradient: rho must be positive");
  const auto n = lat.sites();
  VectorField out(lat);
  int nc[kMaxDim];
  for (int a = 0; a < lat.dim(); a++) {
    std::vector<cplx> buf(n);
    for (std::int64_t m = 0; m < n; m++) {
      mode_coords(lat, m, nc);
      buf[m] = diff_symbol(nc[a], lat.side()) / (laplace_symbol(lat, m) + rho);
    }
    fft(buf, lattice_dims(lat), +1);
    for (std::int64_t i = 0; i < n; i++) out.at(a, i) = buf[i].real();
  }
  return out;
}

LatticeField resolvent_solve(const TorusLattice& lat, double c, double shift,
                             const LatticeField& f) {
  if (shift <= 0.0) throw std::domain_error("resolvent_solve: shift must be positive");
  const auto n = lat.sites();
  std::vector<cplx> buf(n);
  for (std::int64_t i = 0; i < n; i++) buf[i] = f.v[i];
  fft(buf, lattice_dims(lat), -1);
  for (std::int64_t m = 0; m < n; m++)
    buf[m] /= (c * laplace_symbol(lat, m) + shift);
  fft(buf, lattice_dims(lat), +1);
  LatticeField out(lat);
  for (std::int64_t i = 0; i < n; i++) out.v[i] = buf[i].real();
  return out;
}

VectorField apply_T(const SpectralKernel& kernel, const VectorField& h) {
  const TorusLattice& lat = kernel.lat;
  if (!(*h.lat == lat)) throw std::invalid_argument("apply_T: lattice mismatch");
  const int d = lat.dim();
  const auto n = lat.sites();
  std::vector<std::vector<cplx>> hat(d, std::vector<cplx>(n));
  for (int c = 0; c < d; c++) {
    for (std::int64_t i = 0; i < n; i++) hat[c][i] = h.at(c, i);
    fft(hat[c], lattice_dims(lat), -1);
  }
  int nc[kMaxDim];
  cplx D[kMaxDim];
  for (std::int64_t m = 0; m < n; m++) {
    mode_coords(lat, m, nc);
    double d2 = 0.0;
    for (int a = 0; a < d; a++) {
      D[a] = diff_symbol(nc[a], lat.side());
      d2 += std::norm(D[a]);
    }
    cplx s = 0.0;
    for (int a = 0; a < d; a++) s += std::conj(D[a]) * hat[a][m];
    s /= (d2 + kernel.rho);
    for (int a = 0; a < d; a++) hat[a][m] = D[a] * s;
  }
  VectorField out(lat);
  for (int c = 0; c < d; c++) {
    fft(hat[c], lattice_dims(lat), +1);
    for (std::int64_t i = 0; i < n; i++) out.at(c, i) = hat[c][i].real();
  }
  return out;
}

TwoPointField apply_T1(const SpectralKernel& kernel, const TwoPointField& h, bool on_z) {
  const TorusLattice& lat = kernel.lat;
  if (!(*h.lat == lat)) throw std::invalid_argument("apply_T1: lattice mismatch");
  const int d = lat.dim();
  if (h.ncomp != 2 * d) throw std::invalid_argument("apply_T1: expected 2d components");
  const auto n = lat.sites();
  const auto np = h.pairs();
  const int base = on_z ? d : 0;  // which block is acted on

  std::vector<std::vector<cplx>> hat(d, std::vector<cplx>(np));
  for (int c = 0; c < d; c++) {
    const double* src = h.comp(base + c);
    for (std::int64_t p = 0; p < np; p++) hat[c][p] = src[p];
    fft(hat[c], lattice_dims(lat, 2), -1);
  }
  int ny[kMaxDim], nz[kMaxDim];
  cplx D[kMaxDim];
  for (std::int64_t my = 0; my < n; my++) {
    mode_coords(lat, my, ny);
    double dy2 = laplace_symbol(lat, my);
    for (std::int64_t mz = 0; mz < n; mz++) {
      mode_coords(lat, mz, nz);
      double dz2 = laplace_symbol(lat, mz);
      const int* na = on_z ? nz : ny;
      for (int a = 0; a < d; a++) D[a] = diff_symbol(na[a], lat.side());
      std::int64_t p = my * n + mz;
      cplx s = 0.0;
      for (int a = 0; a < d; a++) s += std::conj(D[a]) * hat[a][p];
      s /= (dy2 + dz2 + kernel.rho);
      for (int a = 0; a < d; a++) hat[a][p] = D[a] * s;
    }
  }
  TwoPointField out(lat, 2 * d);
  for (int c = 0; c < d; c++) {
    fft(hat[c], lattice_dims(lat, 2), +1);
    double* dst = out.comp(base + c);
    for (std::int64_t p = 0; p < np; p++) dst[p] = hat[c][p].real();
  }
  return out;
}

TwoPointField apply_T_tensor_identity(const SpectralKernel& kernel,
                                      const TwoPointField& h) {
  const TorusLattice& lat = kernel.lat;
  if (!(*h.lat == lat)) throw std::invalid_argument("apply_T_tensor_identity: lattice mismatch");
  const int d = lat.dim();
  if (h.ncomp != 2 * d)
    throw std::invalid_argument("apply_T_tensor_identity: expected 2d components");
  const auto n = lat.sites();
  const auto np = h.pairs();

  TwoPointField out(lat, 2 * d);
  // z block untouched
  for (int c = d; c < 2 * d; c++) {
    const double* src = h.comp(c);
    double* dst = out.comp(c);
    for (std::int64_t p = 0; p < np; p++) dst[p] = src[p];
  }
  // T_rho on the y block, acting in the y lattice variable; for each fixed z
  // column this is a plain d-dimensional multiplier
  std::vector<std::vector<cplx>> hat(d, std::vector<cplx>(np));
  for (int c = 0; c < d; c++) {
    const double* src = h.comp(c);
    for (std::int64_t p = 0; p < np; p++) hat[c][p] = src[p];
    fft(hat[c], lattice_dims(lat, 2), -1);
  }
  int ny[kMaxDim];
  cplx D[kMaxDim];
  for (std::int64_t my = 0; my < n; my++) {
    mode_coords(lat, my, ny);
    double dy2 = laplace_symbol(lat, my);
    for (int a = 0; a < d; a++) D[a] = diff_symbol(ny[a], lat.side());
    for (std::int64_t mz = 0; mz < n; mz++) {
      std::int64_t p = my * n + mz;
      cplx s = 0.0;
      for (int a = 0; a < d; a++) s += std::conj(D[a]) * hat[a][p];
      s /= (dy2 + kernel.rho);
      for (int a = 0; a < d; a++) hat[a][p] = D[a] * s;
    }
  }
  for (int c = 0; c < d; c++) {
    fft(hat[c], lattice_dims(lat, 2), +1);
    double* dst = out.comp(c);
    for (std::int64_t p = 0; p < np; p++) dst[p] = hat[c][p].real();
  }
  return out;
}

double exact_T_norm(const TorusLattice& lat, double rho) {
  double best = 0.0;
  for (std::int64_t m = 0; m < lat.sites(); m++) {
    double d2 = laplace_symbol(lat, m);
    best = std::max(best, d2 / (d2 + rho));
  }
  return best;
}

PowerIterReport weighted_operator_norm(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::vector<double>& w, int max_iters, std::uint64_t seed, double rel_tol) {
  const std::size_t n = w.size();
  std::vector<double> sqw(n), isqw(n);
  for (std::size_t i = 0; i < n; i++) {
    sqw[i] = std::sqrt(w[i]);
    isqw[i] = 1.0 / sqw[i];
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> v(n), t1(n), t2(n);
  for (auto& x : v) x = gauss(rng);

  PowerIterReport rep;
  double prev = 0.0, prev_change = 0.0;
  const auto& k = simd::active();
  for (int it = 0; it < max_iters; it++) {
    // S = W^{1/2} A W^{-1/2};  one step of S^* S with A self-adjoint
    for (std::size_t i = 0; i < n; i++) t1[i] = v[i] * isqw[i];
    apply(t1, t2);
    for (std::size_t i = 0; i < n; i++) t1[i] = t2[i] * w[i];
    apply(t1, t2);
    for (std::size_t i = 0; i < n; i++) t2[i] *= isqw[i];
    double nrm = std::sqrt(k.sumsq(t2.data(), n));
    rep.iters = it + 1;
    if (nrm == 0.0) {
      rep.norm = 0.0;
      rep.converged = true;
      return rep;
    }
    rep.norm = std::sqrt(nrm);
    k.scale(1.0 / nrm, t2.data(), n);
    v.swap(t2);
    // geometric extrapolation of the remaining error: with per-step change
    // shrinking by factor q, the distance to the limit is about change*q/(1-q)
    double change = std::abs(rep.norm - prev);
    if (it > 1 && prev_change > 0.0) {
      double q = change / prev_change;
      if (q < 0.999 && change * q / (1.0 - q) < rel_tol * rep.norm) {
        rep.converged = true;
        return rep;
      }
    }
    if (it > 0 && change == 0.0) {
      rep.converged = true;
      return rep;
    }
    prev_change = change;
    prev = rep.norm;
  }
  return rep;
}

PowerIterReport estimate_weighted_norm(CzOperator op, const TorusLattice& lat,
                                       double rho, const Weight& w, int iters,
                                       std::uint64_t seed) {
  w.validate(lat.dim());
  const int d = lat.dim();
  const auto n = lat.sites();
  SpectralKernel kernel(lat, op == CzOperator::T ? SpectralKernel::Kind::T
                                                 : SpectralKernel::Kind::T1,
                        rho);
  if (op == CzOperator::T) {
    if (w.is_two_point())
      throw std::domain_error("estimate_weighted_norm: T takes a one-point weight");
    std::vector<double> wv(static_cast<std::size_t>(n) * d);
    for (std::int64_t i = 0; i < n; i++) {
      double wi = w(lat, i);
      for (int c = 0; c < d; c++) wv[static_cast<std::size_t>(c) * n + i] = wi;
    }
    auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
      VectorField f(lat);
      f.v = in;
      VectorField r = apply_T(kernel, f);
      out = std::move(r.v);
    };
    return weighted_operator_norm(apply, wv, iters, seed);
  }

  if (!w.is_two_point())
    throw std::domain_error("estimate_weighted_norm: two-point operator needs w_{alpha,beta}");
  const auto np = n * n;
  std::vector<double> wv(static_cast<std::size_t>(np) * 2 * d);
  for (std::int64_t y = 0; y < n; y++)
    for (std::int64_t z = 0; z < n; z++) {
      double wi = w(lat, y, z);
      for (int c = 0; c < 2 * d; c++)
        wv[static_cast<std::size_t>(c) * np + y * n + z] = wi;
    }
  auto apply = [&](const std::vector<double>& in, std::vector<double>& out) {
    TwoPointField f(lat, 2 * d);
    f.v = in;
    TwoPointField r = op == CzOperator::T1 ? apply_T1(kernel, f)
                                           : apply_T_tensor_identity(kernel, f);
    out = std::move(r.v);
  };
  return weighted_operator_norm(apply, wv, iters, seed);
}

DecayReport verify_decay(double rho, int L, int d) {
  if (d != 2) throw std::domain_error("verify_decay: d=2 only");
  if (L > 512) throw std::domain_error("verify_decay: L <= 512");
  TorusLattice lat(d, L);
  LatticeField g = periodic_green(lat, rho);
  const auto n = lat.sites();

  // first differences: grad G
  VectorField g1 = grad(g);
  // grad div_star G, d x d entries
  std::vector<LatticeField> dstar(d, LatticeField(lat));
  for (int j = 0; j < d; j++)
    axis_div_star(lat, j, g.v.data(), dstar[j].v.data(), 1);
  std::vector<std::vector<double>> g2(static_cast<std::size_t>(d) * d,
                                      std::vector<double>(n));
  for (int j = 0; j < d; j++)
    for (int i = 0; i < d; i++)
      axis_grad(lat, i, dstar[j].v.data(), g2[i * d + j].data(), 1);
  // grad grad div_star G, d^3 entries
  std::vector<std::vector<double>> g3(static_cast<std::size_t>(d) * d * d,
                                      std::vector<double>(n));
  for (int ij = 0; ij < d * d; ij++)
    for (int k2 = 0; k2 < d; k2++)
      axis_grad(lat, k2, g2[ij].data(), g3[k2 * d * d + ij].data(), 1);

  VectorField hq = green_gradient(lat, 1e-6);

  DecayReport rep;
  rep.L = L;
  rep.rho = rho;
  const double window = L / 4.0;
  for (std::int64_t i = 0; i < n; i++) {
    double r = lat.norm(i);
    if (r > window) continue;
    double w1 = std::pow(1.0 + r, d - 1);
    double w2 = std::pow(1.0 + r, d);
    double w3 = std::pow(1.0 + r, d + 1);
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, mh = 0.0;
    for (int a = 0; a < d; a++) {
      m1 += g1.at(a, i) * g1.at(a, i);
      mh += hq.at(a, i) * hq.at(a, i);
    }
    for (const auto& f : g2) m2 += f[i] * f[i];
    for (const auto& f : g3) m3 += f[i] * f[i];
    rep.sup_grad = std::max(rep.sup_grad, std::sqrt(m1) * w1);
    rep.sup_grad_div = std::max(rep.sup_grad_div, std::sqrt(m2) * w2);
    rep.sup_grad2_div = std::max(rep.sup_grad2_div, std::sqrt(m3) * w3);
    rep.hq_sup = std::max(rep.hq_sup, std::sqrt(mh) * (1.0 + r));
  }
  return rep;
}

}  // namespace gradlab
