#include "gradlab/discrete_calculus.hpp"

#include <cmath>
#include <stdexcept>

namespace gradlab {

VectorField grad(const LatticeField& phi) {
  const TorusLattice& lat = *phi.lat;
  VectorField out(lat);
  const auto n = lat.sites();
  for (int a = 0; a < lat.dim(); a++) {
    double* dst = out.comp(a);
    for (std::int64_t i = 0; i < n; i++)
      dst[i] = phi.v[lat.neighbor(i, a, +1)] - phi.v[i];
  }
  return out;
}

LatticeField div_star(const VectorField& h) {
  const TorusLattice& lat = *h.lat;
  LatticeField out(lat);
  const auto n = lat.sites();
  for (int a = 0; a < lat.dim(); a++) {
    const double* src = h.comp(a);
    for (std::int64_t i = 0; i < n; i++)
      out.v[i] += src[lat.neighbor(i, a, -1)] - src[i];
  }
  return out;
}

LatticeField laplacian(const LatticeField& phi) { return div_star(grad(phi)); }

void grad_into(const LatticeField& phi, VectorField& out) {
  const TorusLattice& lat = *phi.lat;
  const auto n = lat.sites();
  for (int a = 0; a < lat.dim(); a++) {
    double* dst = out.comp(a);
    for (std::int64_t i = 0; i < n; i++)
      dst[i] = phi.v[lat.neighbor(i, a, +1)] - phi.v[i];
  }
}

void div_star_into(const VectorField& h, LatticeField& out) {
  const TorusLattice& lat = *h.lat;
  const auto n = lat.sites();
  for (std::int64_t i = 0; i < n; i++) out.v[i] = 0.0;
  for (int a = 0; a < lat.dim(); a++) {
    const double* src = h.comp(a);
    for (std::int64_t i = 0; i < n; i++)
      out.v[i] += src[lat.neighbor(i, a, -1)] - src[i];
  }
}

bool check_gradient_constraint(const VectorField& omega, double tol) {
  const TorusLattice& lat = *omega.lat;
  if (lat.dim() != 2) throw std::domain_error("check_gradient_constraint: d=2 only");
  const auto n = lat.sites();
  const double* w1 = omega.comp(0);
  const double* w2 = omega.comp(1);
  for (std::int64_t i = 0; i < n; i++) {
    std::int64_t ip1 = lat.neighbor(i, 0, +1);
    std::int64_t ip2 = lat.neighbor(i, 1, +1);
    double plaq = w1[i] + w2[ip1] - w1[ip2] - w2[i];
    if (std::abs(plaq) > tol) return false;
  }
  // plaquette-closedness alone does not imply exactness on a torus: the
  // holonomy around each direction must also vanish
  for (int a = 0; a < 2; a++) {
    const double* w = omega.comp(a);
    for (std::int64_t start = 0; start < n; start++) {
      Coords c = lat.coords(start);
      if (c[a] != 0) continue;
      double line = 0.0;
      std::int64_t i = start;
      for (int t = 0; t < lat.side(); t++) {
        line += w[i];
        i = lat.neighbor(i, a, +1);
      }
      if (std::abs(line) > tol) return false;
    }
  }
  return true;
}

void axis_grad(const TorusLattice& lat, int axis, const double* in, double* out,
               std::int64_t inner) {
  const auto n = lat.sites();
  for (std::int64_t i = 0; i < n; i++) {
    std::int64_t j = lat.neighbor(i, axis, +1);
    const double* a = in + i * inner;
    const double* b = in + j * inner;
    double* o = out + i * inner;
    for (std::int64_t t = 0; t < inner; t++) o[t] = b[t] - a[t];
  }
}

void axis_div_star(const TorusLattice& lat, int axis, const double* in, double* out,
                   std::int64_t inner) {
  const auto n = lat.sites();
  for (std::int64_t i = 0; i < n; i++) {
    std::int64_t j = lat.neighbor(i, axis, -1);
    const double* a = in + i * inner;
    const double* b = in + j * inner;
    double* o = out + i * inner;
    for (std::int64_t t = 0; t < inner; t++) o[t] = b[t] - a[t];
  }
}

}  // namespace gradlab
