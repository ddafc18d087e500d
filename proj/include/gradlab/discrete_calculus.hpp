#pragma once

#include "gradlab/torus.hpp"

namespace gradlab {

// Forward difference: (grad phi)_i(x) = phi(x + e_i) - phi(x).
VectorField grad(const LatticeField& phi);

// Adjoint divergence: (div_star h)(x) = sum_i [h_i(x - e_i) - h_i(x)],
// the exact adjoint of grad: <grad phi, h> = <phi, div_star h>.
LatticeField div_star(const VectorField& h);

// div_star(grad(phi)), the (2d+1)-point Laplacian stencil.
LatticeField laplacian(const LatticeField& phi);

// Allocation-free variants for hot loops; `out` must already have the right
// lattice.
void grad_into(const LatticeField& phi, VectorField& out);
void div_star_into(const VectorField& h, LatticeField& out);

// True iff omega is the gradient of a periodic field: every plaquette sum
// omega_1(x) + omega_2(x+e1) - omega_1(x+e2) - omega_2(x) vanishes within tol
// and every directed line sum around the torus vanishes within tol.  d=2 only.
bool check_gradient_constraint(const VectorField& omega, double tol);

// In-place forward difference / adjoint difference of a flat array over one
// torus axis, applied independently for `reps` interleaved copies; used for
// the two-point (Q x Q) operators.  out[p] = in[p at y+e_axis] - in[p].
void axis_grad(const TorusLattice& lat, int axis, const double* in, double* out,
               std::int64_t inner);
void axis_div_star(const TorusLattice& lat, int axis, const double* in, double* out,
                   std::int64_t inner);

}  // namespace gradlab
