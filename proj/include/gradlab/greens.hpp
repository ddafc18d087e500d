#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gradlab/torus.hpp"

namespace gradlab {

// Convolution operators realized as exact Fourier multipliers on the torus.
struct SpectralKernel {
  enum class Kind { GreenRho, T, T1 };
  TorusLattice lat;
  Kind kind;
  double rho;  // strictly positive resolvent shift

  SpectralKernel(const TorusLattice& l, Kind k, double rho_);
};

// G_{rho,Q}: [div_star grad + rho] G = delta_0 on the torus.
LatticeField periodic_green(const TorusLattice& lat, double rho);

// grad of G_{rho,Q}; the rho -> 0 limit of this is the h_Q field.
VectorField green_gradient(const TorusLattice& lat, double rho);

// (c div_star grad + shift)^{-1} f by Fourier multiplier; shift > 0.
LatticeField resolvent_solve(const TorusLattice& lat, double c, double shift,
                             const LatticeField& f);

// T_rho h = grad [div_star grad + rho]^{-1} div_star h, multiplier
// D(k) D(k)^dagger / (|D(k)|^2 + rho).
VectorField apply_T(const SpectralKernel& kernel, const VectorField& h);

// T_{1,rho} on two-point fields with 2d components (y block then z block):
// multiplier D_y D_y^dagger / (|D_y|^2 + |D_z|^2 + rho) on the y block, zero
// on the z block.  on_z = true gives the swap-conjugated operator T_{2,rho}.
TwoPointField apply_T1(const SpectralKernel& kernel, const TwoPointField& h,
                       bool on_z = false);

// T_rho acting on the y block of a two-point field, identity on the z block.
TwoPointField apply_T_tensor_identity(const SpectralKernel& kernel,
                                      const TwoPointField& h);

// Exact unweighted operator norm of T_rho: max_k |D(k)|^2/(|D(k)|^2+rho).
double exact_T_norm(const TorusLattice& lat, double rho);

struct PowerIterReport {
  double norm = 0.0;
  bool converged = false;
  int iters = 0;
};

// Lower-bound estimate of the operator norm of a self-adjoint `apply` on the
// weighted l2 space with per-element weights `w`, via power iteration on the
// similarity-transformed operator.  Deterministic given seed.
PowerIterReport weighted_operator_norm(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::vector<double>& w, int max_iters, std::uint64_t seed,
    double rel_tol = 1e-8);

enum class CzOperator { T, TTensorIdentity, T1 };

// Weighted norm estimate for one of the three singular-integral operators.
PowerIterReport estimate_weighted_norm(CzOperator op, const TorusLattice& lat,
                                       double rho, const Weight& w, int iters,
                                       std::uint64_t seed);

struct DecayReport {
  int L = 0;
  double rho = 0.0;
  // sup over |y| <= L/4 of the weighted difference magnitudes
  double sup_grad = 0.0;         // |grad G| * (1+|y|)^{d-1}
  double sup_grad_div = 0.0;     // |grad div_star G| * (1+|y|)^d
  double sup_grad2_div = 0.0;    // |grad grad div_star G| * (1+|y|)^{d+1}
  double hq_sup = 0.0;           // |h_Q| * (1+|y|), h_Q from rho = 1e-6
};

DecayReport verify_decay(double rho, int L, int d);

}  // namespace gradlab
