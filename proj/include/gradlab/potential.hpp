#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gradlab/torus.hpp"

namespace gradlab {

// Uniformly convex potential V with lambda I <= V''(z) <= Lambda I and
// |V'''| <= M as a trilinear form.  V''' is only ever applied to vectors,
// never materialized.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;

  virtual double value(const double* z) const = 0;
  virtual void gradient(const double* z, double* out) const = 0;
  // row-major d x d
  virtual void hessian(const double* z, double* out) const = 0;
  virtual double third(const double* z, const double* u, const double* v,
                       const double* w) const = 0;

  virtual double lambda() const = 0;
  virtual double Lambda() const = 0;
  virtual double M() const = 0;

  // Fused sum_x V(omega(x)) and per-site V'(omega(x)) over a component-major
  // vector field; the dipole potential overrides this with a SIMD sincos path.
  virtual double batch_value_grad(const VectorField& omega, VectorField& vprime) const;

  // b(z) = I - V''(z)/Lambda, the Neumann-series contraction block;
  // 0 <= b <= (1 - lambda/Lambda) I for every z.
  void contraction(const double* z, double* out) const;
};

std::shared_ptr<Potential> make_quadratic(double c, int d);
// V(z) = |z|^2/2 + a sum_j cos z_j, 0 <= a < 1
std::shared_ptr<Potential> make_dipole(double a, int d);

struct CertifyReport {
  bool ok = false;
  double min_eig_margin = 0.0;   // min over samples of (min eig V'' - lambda)
  double max_eig_margin = 0.0;   // min over samples of (Lambda - max eig V'')
  double sup_third_ratio = 0.0;  // sup |V'''[u,v,w]| / (|u||v||w|)
  double b_max_eig = 0.0;        // sup over samples of max eig of b(z)
  std::vector<double> witness;   // violating z, when !ok
};

// Randomized check of the ellipticity and third-derivative bounds;
// deterministic given seed.
CertifyReport certify_constants(const Potential& V, int sample_count, std::uint64_t seed);

// Per-site matrices b(grad phi(y)), row-major d x d per site.
std::vector<double> contraction_field(const Potential& V, const VectorField& omega);

}  // namespace gradlab
