#include "gradlab/quenched.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "gradlab/discrete_calculus.hpp"
#include "gradlab/fft.hpp"
#include "gradlab/greens.hpp"
#include "gradlab/simd/kernels.hpp"

namespace gradlab {

namespace {

// geometric ratio fitted on the last (up to) 10 update norms
double fit_ratio(const std::vector<double>& r) {
  int last = static_cast<int>(r.size());
  int first = std::max(0, last - 10);
  int n = 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = first; i < last; i++) {
    if (r[i] <= 0.0) continue;
    double x = i, y = std::log(r[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n++;
  }
  if (n < 2) return 0.0;
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::exp(slope);
}

// y-variable difference ops on two-point component arrays (pair index y*N+z)
void tp_grad_y(const TorusLattice& lat, int axis, const double* in, double* out) {
  axis_grad(lat, axis, in, out, lat.sites());
}
void tp_div_star_y(const TorusLattice& lat, int axis, const double* in, double* out) {
  axis_div_star(lat, axis, in, out, lat.sites());
}
void tp_grad_z(const TorusLattice& lat, int axis, const double* in, double* out) {
  const auto n = lat.sites();
  for (std::int64_t y = 0; y < n; y++)
    axis_grad(lat, axis, in + y * n, out + y * n, 1);
}
void tp_div_star_z(const TorusLattice& lat, int axis, const double* in, double* out) {
  const auto n = lat.sites();
  for (std::int64_t y = 0; y < n; y++)
    axis_div_star(lat, axis, in + y * n, out + y * n, 1);
}

std::vector<int> pair_dims(const TorusLattice& lat) {
  return std::vector<int>(static_cast<std::size_t>(2) * lat.dim(), lat.side());
}

void mode_coordsv(const TorusLattice& lat, std::int64_t m, int* n) {
  for (int a = 0; a < lat.dim(); a++)
    n[a] = static_cast<int>((m / lat.stride(a)) % lat.side());
}

// Multiplier D D^dagger / (|D_y|^2 + |D_z|^2 + shift) applied to the y index
// (on_z = false) or z index (on_z = true) of a d x d component two-point
// field, component index a*d + b.
TwoPointField apply_mixed_multiplier(const TorusLattice& lat, double shift,
                                     const TwoPointField& in, bool on_z) {
  const int d = lat.dim();
  const auto n = lat.sites();
  const auto np = in.pairs();
  TwoPointField out(lat, d * d);
  std::vector<std::vector<cplx>> hat(d, std::vector<cplx>(np));
  int nc[kMaxDim];
  cplx D[kMaxDim];
  // spectator index t: z-component b when acting on y, y-component a when on z
  for (int t = 0; t < d; t++) {
    for (int a = 0; a < d; a++) {
      const double* src = in.comp(on_z ? t * d + a : a * d + t);
      for (std::int64_t p = 0; p < np; p++) hat[a][p] = src[p];
      fft(hat[a], pair_dims(lat), -1);
    }
    for (std::int64_t my = 0; my < n; my++) {
      double dy2 = laplace_symbol(lat, my);
      for (std::int64_t mz = 0; mz < n; mz++) {
        double dz2 = laplace_symbol(lat, mz);
        std::int64_t p = my * n + mz;
        mode_coordsv(lat, on_z ? mz : my, nc);
        cplx s = 0.0;
        for (int a = 0; a < d; a++) {
          D[a] = diff_symbol(nc[a], lat.side());
          s += std::conj(D[a]) * hat[a][p];
        }
        s /= (dy2 + dz2 + shift);
        for (int a = 0; a < d; a++) hat[a][p] = D[a] * s;
      }
    }
    for (int a = 0; a < d; a++) {
      fft(hat[a], pair_dims(lat), +1);
      double* dst = out.comp(on_z ? t * d + a : a * d + t);
      for (std::int64_t p = 0; p < np; p++) dst[p] = hat[a][p].real();
    }
  }
  return out;
}

// per-site matrix times the y (a) index: out_{ab}(y,z) = sum_a' M[y]_{a,a'} U_{a'b}
void site_matrix_on_y(const TorusLattice& lat, const std::vector<double>& mats,
                      const TwoPointField& in, TwoPointField& out) {
  const int d = lat.dim();
  const auto n = lat.sites();
  for (std::int64_t y = 0; y < n; y++) {
    const double* M = mats.data() + y * d * d;
    for (int a = 0; a < d; a++)
      for (int b = 0; b < d; b++) {
        double* dst = out.comp(a * d + b) + y * n;
        for (std::int64_t z = 0; z < n; z++) dst[z] = 0.0;
        for (int a2 = 0; a2 < d; a2++) {
          const double* src = in.comp(a2 * d + b) + y * n;
          simd::active().axpy(M[a * d + a2], src, dst, n);
        }
      }
  }
}

// out_{ab}(y,z) = sum_b' M[z]_{b,b'} U_{ab'}
void site_matrix_on_z(const TorusLattice& lat, const std::vector<double>& mats,
                      const TwoPointField& in, TwoPointField& out) {
  const int d = lat.dim();
  const auto n = lat.sites();
  for (int a = 0; a < d; a++)
    for (int b = 0; b < d; b++) {
      double* dst = out.comp(a * d + b);
      for (std::int64_t p = 0; p < in.pairs(); p++) dst[p] = 0.0;
      for (int b2 = 0; b2 < d; b2++) {
        const double* src = in.comp(a * d + b2);
        for (std::int64_t y = 0; y < n; y++)
          for (std::int64_t z = 0; z < n; z++)
            dst[y * n + z] += mats[z * d * d + b * d + b2] * src[y * n + z];
      }
    }
}

}  // namespace

void QuenchedProblem::validate() const {
  if (!lat || !V) throw std::domain_error("QuenchedProblem: missing lattice or potential");
  if (rho_s < 0.0 || m < 0.0 || rho_s + m * m <= 0.0)
    throw std::domain_error("QuenchedProblem: need rho_s, m >= 0 and rho_s + m^2 > 0");
  if (phi.lat != lat) throw std::domain_error("QuenchedProblem: phi lattice mismatch");
}

NeumannReport solve_one_variable(const QuenchedProblem& p, const VectorField& rhs,
                                 double tol, int max_iter) {
  p.validate();
  if (tol <= 0.0) throw std::domain_error("solve_one_variable: tol must be positive");
  const TorusLattice& lat = *p.lat;
  const int d = lat.dim();
  const auto n = lat.sites();
  const double Lam = p.V->Lambda();

  VectorField omega = grad(p.phi);
  std::vector<double> bmat = contraction_field(*p.V, omega);

  SpectralKernel T(lat, SpectralKernel::Kind::T, p.rho_s + p.m * p.m / Lam);
  VectorField c0 = apply_T(T, rhs);
  simd::active().scale(1.0 / Lam, c0.v.data(), c0.v.size());

  NeumannReport rep;
  VectorField u = c0;
  VectorField bu(lat), next(lat);
  for (int it = 0; it < max_iter; it++) {
    // bu = b(grad phi) u per site
    for (std::int64_t i = 0; i < n; i++) {
      const double* M = bmat.data() + i * d * d;
      for (int a = 0; a < d; a++) {
        double s = 0.0;
        for (int a2 = 0; a2 < d; a2++) s += M[a * d + a2] * u.at(a2, i);
        bu.at(a, i) = s;
      }
    }
    next = apply_T(T, bu);
    for (std::size_t i = 0; i < next.v.size(); i++) next.v[i] += c0.v[i];
    double upd = 0.0;
    for (std::size_t i = 0; i < next.v.size(); i++) {
      double dlt = next.v[i] - u.v[i];
      upd += dlt * dlt;
    }
    upd = std::sqrt(upd);
    rep.update_norms.push_back(upd);
    u = next;
    rep.iters = it + 1;
    if (upd < tol) {
      rep.converged = true;
      break;
    }
    if (rep.update_norms.size() > 5) {
      auto& r = rep.update_norms;
      std::size_t k = r.size();
      if (r[k - 1] > 10.0 * r[0] && r[k - 1] > r[k - 2]) {
        rep.threshold_violated = true;
        break;
      }
    }
  }
  rep.ratio = fit_ratio(rep.update_norms);
  rep.solution = u;

  // residual of the assembled equation, evaluated in real space
  // Psi = (div_star grad)^{-1} div_star u  (zero mode fixed to zero)
  LatticeField ds = div_star(u);
  std::vector<cplx> buf(n);
  for (std::int64_t i = 0; i < n; i++) buf[i] = ds.v[i];
  std::vector<int> dims(d, lat.side());
  fft(buf, dims, -1);
  for (std::int64_t m2 = 0; m2 < n; m2++) {
    double s = laplace_symbol(lat, m2);
    buf[m2] = s > 0.0 ? buf[m2] / s : 0.0;
  }
  fft(buf, dims, +1);
  LatticeField psi(lat);
  for (std::int64_t i = 0; i < n; i++) psi.v[i] = buf[i].real();

  VectorField gp = grad(psi);
  VectorField hess_gp(lat);
  std::vector<double> hess(static_cast<std::size_t>(n) * d * d);
  double z[kMaxDim];
  for (std::int64_t i = 0; i < n; i++) {
    for (int c = 0; c < d; c++) z[c] = omega.at(c, i);
    p.V->hessian(z, hess.data() + i * d * d);
  }
  for (std::int64_t i = 0; i < n; i++) {
    const double* M = hess.data() + i * d * d;
    for (int a = 0; a < d; a++) {
      double s = 0.0;
      for (int a2 = 0; a2 < d; a2++) s += M[a * d + a2] * gp.at(a2, i);
      hess_gp.at(a, i) = s;
    }
  }
  LatticeField lhs = div_star(hess_gp);
  LatticeField rhs_s = div_star(rhs);
  double shift = Lam * p.rho_s + p.m * p.m;
  double num = 0.0, den = 0.0;
  for (std::int64_t i = 0; i < n; i++) {
    double r = shift * psi.v[i] + lhs.v[i] - rhs_s.v[i];
    num += r * r;
    den += rhs_s.v[i] * rhs_s.v[i];
  }
  rep.residual = std::sqrt(num) / std::max(1e-300, std::sqrt(den));
  return rep;
}

VectorField solve_one_variable_direct(const QuenchedProblem& p, const VectorField& rhs) {
  p.validate();
  const TorusLattice& lat = *p.lat;
  const int d = lat.dim();
  const auto n = lat.sites();
  if (n > 4096) throw std::length_error("solve_one_variable_direct: lattice too large");
  const double shift = p.V->Lambda() * p.rho_s + p.m * p.m;

  VectorField omega = grad(p.phi);
  std::vector<double> hess(static_cast<std::size_t>(n) * d * d);
  double z[kMaxDim];
  for (std::int64_t i = 0; i < n; i++) {
    for (int c = 0; c < d; c++) z[c] = omega.at(c, i);
    p.V->hessian(z, hess.data() + i * d * d);
  }

  auto apply_op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    LatticeField f(lat);
    for (std::int64_t i = 0; i < n; i++) f.v[i] = x[i];
    VectorField g = grad(f);
    VectorField hg(lat);
    for (std::int64_t i = 0; i < n; i++) {
      const double* M = hess.data() + i * d * d;
      for (int a = 0; a < d; a++) {
        double s = 0.0;
        for (int a2 = 0; a2 < d; a2++) s += M[a * d + a2] * g.at(a2, i);
        hg.at(a, i) = s;
      }
    }
    LatticeField dsg = div_star(hg);
    for (std::int64_t i = 0; i < n; i++) out[i] = shift * x[i] + dsg.v[i];
  };

  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n), col(n);
  for (std::int64_t j = 0; j < n; j++) {
    e[j] = 1.0;
    apply_op(e, col);
    A.col(j) = col;
    e[j] = 0.0;
  }
  LatticeField dsr = div_star(rhs);
  Eigen::VectorXd b(n);
  for (std::int64_t i = 0; i < n; i++) b[i] = dsr.v[i];
  Eigen::VectorXd psi = A.partialPivLu().solve(b);
  LatticeField pf(lat);
  for (std::int64_t i = 0; i < n; i++) pf.v[i] = psi[i];
  return grad(pf);
}

NeumannReport solve_two_variable(const QuenchedProblem& p, const TwoPointField& phi_rhs,
                                 double tol, int max_iter) {
  p.validate();
  const TorusLattice& lat = *p.lat;
  const int d = lat.dim();
  if (lat.dim() != 2) throw std::domain_error("solve_two_variable: d=2 only");
  if (phi_rhs.ncomp != d) throw std::invalid_argument("solve_two_variable: Phi needs d components");
  const auto n = lat.sites();
  const double Lam = p.V->Lambda();
  const double shift = p.rho_s + 2.0 * p.m * p.m / Lam;

  VectorField omega = grad(p.phi);
  std::vector<double> bmat = contraction_field(*p.V, omega);

  // R_{ab} = grad_{z,b} Phi_a
  TwoPointField R(lat, d * d);
  for (int a = 0; a < d; a++)
    for (int b = 0; b < d; b++)
      tp_grad_z(lat, b, phi_rhs.comp(a), R.comp(a * d + b));

  TwoPointField c1 = apply_mixed_multiplier(lat, shift, R, false);
  simd::active().scale(1.0 / Lam, c1.v.data(), c1.v.size());

  NeumannReport rep;
  // the certified contraction factor 2(1 - lambda/Lambda) reaches 1 at
  // lambda/Lambda = 1/2; below that threshold convergence is no longer
  // guaranteed and the report says so even when the iteration happens to
  // settle for this particular coefficient field
  if (p.V->lambda() / Lam <= 0.5) rep.threshold_violated = true;
  TwoPointField u1 = c1, u2(lat, d * d);
  TwoPointField sum(lat, d * d), t1(lat, d * d), t2(lat, d * d);
  for (int it = 0; it < max_iter; it++) {
    for (std::size_t i = 0; i < sum.v.size(); i++) sum.v[i] = u1.v[i] + u2.v[i];
    site_matrix_on_y(lat, bmat, sum, t1);
    site_matrix_on_z(lat, bmat, sum, t2);
    TwoPointField n1 = apply_mixed_multiplier(lat, shift, t1, false);
    TwoPointField n2 = apply_mixed_multiplier(lat, shift, t2, true);
    for (std::size_t i = 0; i < n1.v.size(); i++) n1.v[i] += c1.v[i];
    double upd = 0.0;
    for (std::size_t i = 0; i < n1.v.size(); i++) {
      double a = n1.v[i] - u1.v[i];
      double b = n2.v[i] - u2.v[i];
      upd += a * a + b * b;
    }
    upd = std::sqrt(upd);
    rep.update_norms.push_back(upd);
    u1 = std::move(n1);
    u2 = std::move(n2);
    rep.iters = it + 1;
    if (upd < tol) {
      rep.converged = true;
      break;
    }
    if (rep.update_norms.size() >= 5) {
      auto& r = rep.update_norms;
      std::size_t k = r.size();
      if (r[k - 1] > r[k - 2] && r[k - 2] > r[k - 3] && r[k - 1] > 2.0 * r[0]) {
        rep.threshold_violated = true;
        break;
      }
    }
  }
  rep.ratio = fit_ratio(rep.update_norms);
  if (rep.ratio >= 1.0) rep.threshold_violated = true;

  // Residual of the assembled coupled system, evaluated with real-space
  // difference operators.  W1 = grad_z Psi_1 (components b), V2 = grad_y
  // Psi_2 (components a) are recovered from the exact-gradient structure of
  // the iterates by inverting the corresponding lattice Laplacian.
  const auto np = u1.pairs();
  std::vector<int> dims = pair_dims(lat);
  auto invert_y = [&](const TwoPointField& U) {
    // out_b = (div_y grad_y)^{-1} div_star_y . U_{.b}
    TwoPointField out(lat, d);
    for (int b = 0; b < d; b++) {
      std::vector<double> acc(np, 0.0), tmp(np);
      for (int a = 0; a < d; a++) {
        tp_div_star_y(lat, a, U.comp(a * d + b), tmp.data());
        for (std::int64_t q = 0; q < np; q++) acc[q] += tmp[q];
      }
      std::vector<cplx> buf(np);
      for (std::int64_t q = 0; q < np; q++) buf[q] = acc[q];
      fft(buf, dims, -1);
      for (std::int64_t my = 0; my < n; my++) {
        double s = laplace_symbol(lat, my);
        for (std::int64_t mz = 0; mz < n; mz++)
          buf[my * n + mz] = s > 0.0 ? buf[my * n + mz] / s : 0.0;
      }
      fft(buf, dims, +1);
      double* dst = out.comp(b);
      for (std::int64_t q = 0; q < np; q++) dst[q] = buf[q].real();
    }
    return out;
  };
  auto invert_z = [&](const TwoPointField& U) {
    TwoPointField out(lat, d);
    for (int a = 0; a < d; a++) {
      std::vector<double> acc(np, 0.0), tmp(np);
      for (int b = 0; b < d; b++) {
        tp_div_star_z(lat, b, U.comp(a * d + b), tmp.data());
        for (std::int64_t q = 0; q < np; q++) acc[q] += tmp[q];
      }
      std::vector<cplx> buf(np);
      for (std::int64_t q = 0; q < np; q++) buf[q] = acc[q];
      fft(buf, dims, -1);
      for (std::int64_t my = 0; my < n; my++)
        for (std::int64_t mz = 0; mz < n; mz++) {
          double s = laplace_symbol(lat, mz);
          buf[my * n + mz] = s > 0.0 ? buf[my * n + mz] / s : 0.0;
        }
      fft(buf, dims, +1);
      double* dst = out.comp(a);
      for (std::int64_t q = 0; q < np; q++) dst[q] = buf[q].real();
    }
    return out;
  };

  TwoPointField W1 = invert_y(u1);  // d comps indexed by b
  TwoPointField V2 = invert_z(u2);  // d comps indexed by a

  std::vector<double> hessm(static_cast<std::size_t>(n) * d * d);
  double zv[kMaxDim];
  for (std::int64_t i = 0; i < n; i++) {
    for (int c = 0; c < d; c++) zv[c] = omega.at(c, i);
    p.V->hessian(zv, hessm.data() + i * d * d);
  }
  const double c0 = Lam * p.rho_s + 2.0 * p.m * p.m;

  double num = 0.0, den = 0.0;
  std::vector<double> tmp(np), tmp2(np), acc(np);
  // equation 1, components b
  for (int b = 0; b < d; b++) {
    std::vector<double> res(np, 0.0);
    const double* w1 = W1.comp(b);
    for (std::int64_t q = 0; q < np; q++) res[q] = c0 * w1[q];
    // Lambda * laplacian_z W1_b
    for (int b2 = 0; b2 < d; b2++) {
      tp_grad_z(lat, b2, w1, tmp.data());
      tp_div_star_z(lat, b2, tmp.data(), tmp2.data());
      for (std::int64_t q = 0; q < np; q++) res[q] += Lam * tmp2[q];
    }
    // + div_star_y [V''(y) U1]_b - Lambda div_star_y [b(y) U2]_b - div_star_y R_b
    for (int a = 0; a < d; a++) {
      for (std::int64_t y = 0; y < n; y++) {
        const double* H = hessm.data() + y * d * d;
        const double* B = bmat.data() + y * d * d;
        for (std::int64_t z2 = 0; z2 < n; z2++) {
          double s = 0.0;
          for (int a2 = 0; a2 < d; a2++)
            s += H[a * d + a2] * u1.comp(a2 * d + b)[y * n + z2] -
                 Lam * B[a * d + a2] * u2.comp(a2 * d + b)[y * n + z2];
          acc[y * n + z2] = s - R.comp(a * d + b)[y * n + z2];
        }
      }
      tp_div_star_y(lat, a, acc.data(), tmp.data());
      for (std::int64_t q = 0; q < np; q++) res[q] += tmp[q];
    }
    for (std::int64_t q = 0; q < np; q++) num += res[q] * res[q];
  }
  // equation 2, components a
  for (int a = 0; a < d; a++) {
    std::vector<double> res(np, 0.0);
    const double* v2 = V2.comp(a);
    for (std::int64_t q = 0; q < np; q++) res[q] = c0 * v2[q];
    for (int a2 = 0; a2 < d; a2++) {
      tp_grad_y(lat, a2, v2, tmp.data());
      tp_div_star_y(lat, a2, tmp.data(), tmp2.data());
      for (std::int64_t q = 0; q < np; q++) res[q] += Lam * tmp2[q];
    }
    for (int b = 0; b < d; b++) {
      for (std::int64_t y = 0; y < n; y++)
        for (std::int64_t z2 = 0; z2 < n; z2++) {
          const double* H = hessm.data() + z2 * d * d;
          const double* B = bmat.data() + z2 * d * d;
          double s = 0.0;
          for (int b2 = 0; b2 < d; b2++)
            s += H[b * d + b2] * u2.comp(a * d + b2)[y * n + z2] -
                 Lam * B[b * d + b2] * u1.comp(a * d + b2)[y * n + z2];
          acc[y * n + z2] = s;
        }
      tp_div_star_z(lat, b, acc.data(), tmp.data());
      for (std::int64_t q = 0; q < np; q++) res[q] += tmp[q];
    }
    for (std::int64_t q = 0; q < np; q++) num += res[q] * res[q];
  }
  // normalize by the rhs of equation 1
  for (int b = 0; b < d; b++) {
    std::vector<double> rb(np, 0.0);
    for (int a = 0; a < d; a++) {
      tp_div_star_y(lat, a, R.comp(a * d + b), tmp.data());
      for (std::int64_t q = 0; q < np; q++) rb[q] += tmp[q];
    }
    for (std::int64_t q = 0; q < np; q++) den += rb[q] * rb[q];
  }
  rep.residual = std::sqrt(num) / std::max(1e-300, std::sqrt(den));
  rep.u1 = std::move(u1);
  rep.u2 = std::move(u2);
  return rep;
}

X2Report verify_x2_bound(const QuenchedProblem& p, const NeumannReport& rep,
                         const TwoPointField& phi_rhs, double slack) {
  p.validate();
  const double lam = p.V->lambda(), Lam = p.V->Lambda();
  if (2.0 * lam - Lam <= 0.0)
    throw std::domain_error("verify_x2_bound: requires lambda/Lambda > 1/2");
  if (!rep.converged) throw std::domain_error("verify_x2_bound: unconverged solution");
  const TorusLattice& lat = *p.lat;
  const int d = lat.dim();
  TwoPointField R(lat, d * d);
  for (int a = 0; a < d; a++)
    for (int b = 0; b < d; b++)
      tp_grad_z(lat, b, phi_rhs.comp(a), R.comp(a * d + b));
  X2Report out;
  out.solution_norm = std::sqrt(norm2(rep.u1) + norm2(rep.u2));
  out.rhs_norm = std::sqrt(norm2(R));
  out.ratio = out.rhs_norm > 0.0 ? out.solution_norm / out.rhs_norm : 0.0;
  out.bound = Lam / (2.0 * lam - Lam);
  out.ok = out.ratio <= out.bound * (1.0 + slack);
  return out;
}

HsReport gaussian_hs_check(const TorusLattice& lat, double c, double m,
                           const LatticeField& f, const LatticeField& g) {
  if (c <= 0.0 || m <= 0.0) throw std::domain_error("gaussian_hs_check: c, m > 0");
  const auto n = lat.sites();
  const auto& k = simd::active();
  double sf = k.sum(f.v.data(), n), sg = k.sum(g.v.data(), n);
  if (std::abs(sf) > 1e-9 * n || std::abs(sg) > 1e-9 * n)
    throw std::domain_error("gaussian_hs_check: observables must be mean-zero");

  HsReport rep;
  LatticeField u = resolvent_solve(lat, c, m * m, g);
  rep.cov_direct = dot(f, u);

  // matrix-free conjugate gradient on (c div_star grad + m^2) x = g
  LatticeField x(lat), r = g, pdir = g, tmp(lat);
  double rs = norm2(r);
  for (int it = 0; it < 10000 && rs > 1e-30; it++) {
    VectorField gp = grad(pdir);
    tmp = div_star(gp);
    for (std::int64_t i = 0; i < n; i++) tmp.v[i] = c * tmp.v[i] + m * m * pdir.v[i];
    double alpha = rs / dot(pdir, tmp);
    k.axpy(alpha, pdir.v.data(), x.v.data(), n);
    k.axpy(-alpha, tmp.v.data(), r.v.data(), n);
    double rs2 = norm2(r);
    if (std::sqrt(rs2) < 1e-14 * std::sqrt(norm2(g))) break;
    double beta = rs2 / rs;
    rs = rs2;
    for (std::int64_t i = 0; i < n; i++) pdir.v[i] = r.v[i] + beta * pdir.v[i];
  }
  rep.cov_resolvent = dot(f, x);
  rep.abs_diff = std::abs(rep.cov_direct - rep.cov_resolvent);
  rep.ok = rep.abs_diff <= 1e-10 * std::max(1.0, std::abs(rep.cov_direct));
  return rep;
}

}  // namespace gradlab
