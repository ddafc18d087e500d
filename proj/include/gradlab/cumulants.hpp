#pragma once

#include <vector>

#include "gradlab/sampler.hpp"
#include "gradlab/stats.hpp"
#include "gradlab/torus.hpp"

namespace gradlab {

// Estimated mu-derivatives of the generating function at the ensemble's
// tilt: g2 = Var(X), g3 = third central moment of X, X = phi(0) - phi(x).
struct CumulantReport {
  Coords x{};
  double mu = 0.0;
  double g2 = 0.0;
  double g2_se = 0.0;
  double g3 = 0.0;
  double g3_se = 0.0;
  std::size_t n_samples = 0;
  double ess = 0.0;
};

// Cumulants of phi(0) - phi(x) under the ensemble's measure, with jackknife
// standard errors over chains.  `x` must be the ensemble's tilt site or one
// of its tracked sites.  Refuses unconverged ensembles (split reduction
// factor >= 1.05) with a std::domain_error carrying the diagnostic.
CumulantReport estimate_cumulants(const ChainEnsemble& e, const Coords& x);

struct ReweightPoint {
  double mu = 0.0;
  double g = 0.0;       // log < exp(mu X) > under the mu = 0 ensemble
  double g_se = 0.0;
  double g2 = 0.0;      // tilted variance by exponential reweighting
  double g2_se = 0.0;
  double g3 = 0.0;      // tilted third central moment
  double g3_se = 0.0;
  double ess = 0.0;     // (sum w)^2 / sum w^2 of the importance weights
  bool reliable = false;  // ess >= 50
};

// Exponential reweighting of a mu = 0 ensemble onto a grid of tilts.
// Requires |mu| * SD(X) <= 2 at every grid point.
std::vector<ReweightPoint> reweighted_g(const ChainEnsemble& e, const Coords& x,
                                        const std::vector<double>& mu_grid);

struct HQField {
  TorusLattice lat;
  VectorField values;   // h_Q = grad G_{rho,Q}
  double rho_used = 0.0;
  // sup over |y| <= L/4 of |h_Q(y)| (1 + |y|)
  double decay_sup = 0.0;
  // relative l2 change of the field when rho is halved
  double rho_stability = 0.0;
  // worst absolute error of the telescoping identity over the random probes,
  // remainder term included
  double telescope_err = 0.0;
  // largest remainder magnitude rho (G - tau_x G, phi), and its ratio to the
  // same quantity at rho/2 (should be near 2: linear shrinkage)
  double remainder = 0.0;
  double remainder_halving_ratio = 0.0;
  bool ok = false;
};

// Builds h_Q at resolvent parameter rho <= 1e-4 and verifies the telescoping
// identity phi(0) - phi(x) = (h_Q, omega) - (tau_x h_Q, omega) + remainder on
// 20 random fields to 1e-8.
HQField build_hq(const TorusLattice& lat, double rho, std::uint64_t seed = 1);

struct SweepCell {
  int L = 0;
  double m = 0.0;
  double mu = 0.0;
  Coords x{};
  double g2 = 0.0, g2_se = 0.0;
  double g3 = 0.0, g3_se = 0.0;
  double ess = 0.0;
  double rhat = 0.0;
  bool converged = false;
};

struct SweepChecks {
  LinearFit g2_vs_logx;     // affine growth of g2(x, 0) in log |x|
  bool g2_affine_ok = false;   // fit R^2 >= 0.9 and slope > 0
  LinearFit g3_vs_logx;     // |g3| trend at the tilted point
  bool g3_trendless = false;   // slope within 3 SE of 0
  bool x3_symmetric_ok = false;  // <X^3> at mu = 0 consistent with 0 (3 SE)
  bool inconclusive = false;   // statistical power insufficient
};

struct SweepResult {
  std::vector<SweepCell> cells;
  SweepChecks checks;
};

struct SweepSettings {
  int chains = 4;
  int steps = 40000;
  SampleOptions opts;
};

// Monte Carlo sweep over an x-grid (along axis 0) and an m-grid at fixed
// tilt mu, for one potential.  Produces per-cell cumulants at mu and at 0,
// plus the trend checks described above, evaluated on the final m.
SweepResult theorem_sweep(std::shared_ptr<const Potential> V, int d, int L,
                          const std::vector<double>& m_grid, double mu,
                          const std::vector<int>& x_grid,
                          const SweepSettings& settings, std::uint64_t seed);

// Third joint cumulant <A B C>_c of A = (h1, omega), B = (h2, omega),
// C = (h3, omega) from an ensemble with kept configurations, with jackknife
// SE over chains.
JackknifeReport joint_third_cumulant(const ChainEnsemble& e, const VectorField& h1,
                                     const VectorField& h2, const VectorField& h3);

}  // namespace gradlab
