#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gradlab/potential.hpp"
#include "gradlab/torus.hpp"

namespace gradlab {

// Target measure on the torus:
//   dP ~ exp[ -sum_x V(grad phi(x)) - (m^2/2) sum_x phi(x)^2
//             + mu (phi(0) - phi(x_tilt)) ] dphi.
struct ModelSpec {
  const TorusLattice* lat = nullptr;
  std::shared_ptr<const Potential> V;
  double m = 0.0;    // strictly positive
  double mu = 0.0;   // tilt strength
  Coords x_tilt{};   // tilt site; X = phi(0) - phi(x_tilt)

  void validate() const;  // throws std::domain_error
  std::uint64_t hash() const;
};

struct Chain {
  LatticeField phi;
  std::mt19937_64 rng;
  double step = 0.0;
  std::uint64_t seed = 0;
  std::int64_t steps_done = 0;
  std::int64_t accepted = 0;   // post burn-in
  std::int64_t proposed = 0;   // post burn-in
  std::vector<double> xs;        // recorded X per retained sample
  std::vector<double> energies;  // recorded H(phi)
  std::vector<std::vector<double>> obs;  // one stream per tracked site
  std::vector<LatticeField> kept;  // optional full configurations

  double acceptance_rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  }
};

struct SampleOptions {
  int burn_in = 2000;
  int thin = 10;               // record every `thin` post-burn-in steps
  int keep_fields_stride = 0;  // retain full configs every this many records
  double step0 = 0.2;          // initial step size before tuning
  // extra streamed difference observables phi(0) - phi(x) besides x_tilt
  std::vector<Coords> track;
};

struct ChainEnsemble {
  ModelSpec spec;
  SampleOptions opts;
  std::vector<Chain> chains;

  std::size_t samples_per_chain() const {
    return chains.empty() ? 0 : chains[0].xs.size();
  }
};

// Metropolis-adjusted Langevin sampling.  The step size is tuned during
// burn-in to acceptance in [0.4, 0.7] and frozen afterwards, so the recorded
// portion of each chain is exactly reversible for the target.  Chains use
// disjoint deterministic RNG substreams derived from the seed.  Throws
// std::runtime_error when a non-finite energy is encountered.
ChainEnsemble sample(const ModelSpec& spec, int n_chains, int n_steps,
                     std::uint64_t seed, const SampleOptions& opts = {});

// Continue an ensemble for extra post-burn-in steps (step sizes stay frozen).
void extend(ChainEnsemble& e, int extra_steps);

struct DiagnoseReport {
  double rhat_x = 0.0;
  double ess_x = 0.0;
  double rhat_energy = 0.0;
  double ess_energy = 0.0;
  bool converged = false;  // both reduction factors < 1.05
};

DiagnoseReport diagnose(const ChainEnsemble& e);

struct BlReport {
  double log_moment = 0.0;    // log < exp[(h, grad phi)] >
  double se = 0.0;            // jackknife over chains
  double bound_generic = 0.0; // |h|^2 / (2 lambda)
  double bound_sharp = 0.0;   // (div* h, [lambda div* grad + m^2]^{-1} div* h)/2
  bool ok = false;            // log_moment <= bound_generic + 3 se
  bool heavy_tail = false;    // se exceeds 20% of the bound gap
};

// Gaussian-domination (Brascamp-Lieb) check on a mu = 0 ensemble with kept
// configurations.  Enforces |h|^2 / lambda <= 2.
BlReport check_brascamp_lieb(const ChainEnsemble& e, const VectorField& h);

// Binary checkpoint of chain state.  Layout, all integers and floats
// little-endian:
//   bytes 0..7   magic "GLCKPT01"
//   u64          model hash (lattice, potential, m, mu, x_tilt)
//   u32 d, u32 L, u32 n_chains
//   per chain:
//     u64  steps done
//     f64  step size
//     u64  seed
//     i64  accepted, i64 proposed
//     u64  RNG state length, then that many bytes (mt19937_64 text state)
//     L^d  field values as f64
// Recorded observable streams are not part of the checkpoint.
void save_checkpoint(const ChainEnsemble& e, const std::string& path);

// Restores chain state; `spec` must hash-match the checkpoint header.
ChainEnsemble load_checkpoint(const std::string& path, const ModelSpec& spec,
                              const SampleOptions& opts = {});

}  // namespace gradlab
