#include "gradlab/potential.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "gradlab/simd/kernels.hpp"

namespace gradlab {

double Potential::batch_value_grad(const VectorField& omega, VectorField& vprime) const {
  const TorusLattice& lat = *omega.lat;
  const auto n = lat.sites();
  const int d = lat.dim();
  double z[kMaxDim], g[kMaxDim];
  double energy = 0.0;
  for (std::int64_t i = 0; i < n; i++) {
    for (int c = 0; c < d; c++) z[c] = omega.at(c, i);
    energy += value(z);
    gradient(z, g);
    for (int c = 0; c < d; c++) vprime.at(c, i) = g[c];
  }
  return energy;
}

void Potential::contraction(const double* z, double* out) const {
  const int d = dim();
  hessian(z, out);
  const double invL = 1.0 / Lambda();
  for (int i = 0; i < d * d; i++) out[i] = -out[i] * invL;
  for (int i = 0; i < d; i++) out[i * d + i] += 1.0;
}

namespace {

class QuadraticPotential final : public Potential {
 public:
  QuadraticPotential(double c, int d) : c_(c), d_(d) {
    if (c <= 0.0) throw std::domain_error("make_quadratic: c must be positive");
  }
  int dim() const override { return d_; }
  std::string name() const override { return "quadratic"; }
  double value(const double* z) const override {
    double s = 0.0;
    for (int i = 0; i < d_; i++) s += z[i] * z[i];
    return 0.5 * c_ * s;
  }
  void gradient(const double* z, double* out) const override {
    for (int i = 0; i < d_; i++) out[i] = c_ * z[i];
  }
  void hessian(const double*, double* out) const override {
    for (int i = 0; i < d_ * d_; i++) out[i] = 0.0;
    for (int i = 0; i < d_; i++) out[i * d_ + i] = c_;
  }
  double third(const double*, const double*, const double*, const double*) const override {
    return 0.0;
  }
  double lambda() const override { return c_; }
  double Lambda() const override { return c_; }
  double M() const override { return 0.0; }

  double batch_value_grad(const VectorField& omega, VectorField& vprime) const override {
    const auto& k = simd::active();
    const auto n = omega.lat->sites();
    double s = 0.0;
    for (int c = 0; c < d_; c++) {
      s += k.sumsq(omega.comp(c), n);
      const double* src = omega.comp(c);
      double* dst = vprime.comp(c);
      for (std::int64_t i = 0; i < n; i++) dst[i] = c_ * src[i];
    }
    return 0.5 * c_ * s;
  }

 private:
  double c_;
  int d_;
};

class DipolePotential final : public Potential {
 public:
  DipolePotential(double a, int d) : a_(a), d_(d) {
    if (a < 0.0 || a >= 1.0)
      throw std::domain_error("make_dipole: need 0 <= a < 1 for uniform convexity");
  }
  int dim() const override { return d_; }
  std::string name() const override { return "dipole"; }
  double value(const double* z) const override {
    double s = 0.0;
    for (int i = 0; i < d_; i++) s += 0.5 * z[i] * z[i] + a_ * std::cos(z[i]);
    return s;
  }
  void gradient(const double* z, double* out) const override {
    for (int i = 0; i < d_; i++) out[i] = z[i] - a_ * std::sin(z[i]);
  }
  void hessian(const double* z, double* out) const override {
    for (int i = 0; i < d_ * d_; i++) out[i] = 0.0;
    for (int i = 0; i < d_; i++) out[i * d_ + i] = 1.0 - a_ * std::cos(z[i]);
  }
  double third(const double* z, const double* u, const double* v,
               const double* w) const override {
    double s = 0.0;
    for (int i = 0; i < d_; i++) s += a_ * std::sin(z[i]) * u[i] * v[i] * w[i];
    return s;
  }
  double lambda() const override { return 1.0 - a_; }
  double Lambda() const override { return 1.0 + a_; }
  double M() const override { return a_; }

  double batch_value_grad(const VectorField& omega, VectorField& vprime) const override {
    const auto& k = simd::active();
    const auto n = omega.lat->sites();
    scratch_s_.resize(n);
    scratch_c_.resize(n);
    double energy = 0.0;
    for (int c = 0; c < d_; c++) {
      const double* z = omega.comp(c);
      k.sincos(z, scratch_s_.data(), scratch_c_.data(), n);
      energy += 0.5 * k.sumsq(z, n) + a_ * k.sum(scratch_c_.data(), n);
      double* dst = vprime.comp(c);
      for (std::int64_t i = 0; i < n; i++) dst[i] = z[i] - a_ * scratch_s_[i];
    }
    return energy;
  }

 private:
  double a_;
  int d_;
  mutable std::vector<double> scratch_s_, scratch_c_;
};

}  // namespace

std::shared_ptr<Potential> make_quadratic(double c, int d) {
  return std::make_shared<QuadraticPotential>(c, d);
}

std::shared_ptr<Potential> make_dipole(double a, int d) {
  return std::make_shared<DipolePotential>(a, d);
}

CertifyReport certify_constants(const Potential& V, int sample_count, std::uint64_t seed) {
  if (sample_count < 1) throw std::domain_error("certify_constants: sample_count >= 1");
  const int d = V.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 3.0);
  CertifyReport rep;
  rep.min_eig_margin = 1e300;
  rep.max_eig_margin = 1e300;
  rep.sup_third_ratio = 0.0;
  rep.b_max_eig = 0.0;
  rep.ok = true;

  Eigen::MatrixXd H(d, d), B(d, d);
  std::vector<double> z(d), u(d), v(d), w(d), h(d * d), b(d * d);
  const double tol = 1e-10;
  for (int s = 0; s < sample_count; s++) {
    for (int i = 0; i < d; i++) z[i] = gauss(rng);
    V.hessian(z.data(), h.data());
    for (int i = 0; i < d; i++)
      for (int j = 0; j < d; j++) H(i, j) = h[i * d + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    double lo = es.eigenvalues().minCoeff();
    double hi = es.eigenvalues().maxCoeff();
    rep.min_eig_margin = std::min(rep.min_eig_margin, lo - V.lambda());
    rep.max_eig_margin = std::min(rep.max_eig_margin, V.Lambda() - hi);
    if (lo < V.lambda() - tol || hi > V.Lambda() + tol) {
      rep.ok = false;
      if (rep.witness.empty()) rep.witness = z;
    }

    V.contraction(z.data(), b.data());
    for (int i = 0; i < d; i++)
      for (int j = 0; j < d; j++) B(i, j) = b[i * d + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
    rep.b_max_eig = std::max(rep.b_max_eig, eb.eigenvalues().maxCoeff());

    double nu = 0.0, nv = 0.0, nw = 0.0;
    for (int i = 0; i < d; i++) {
      u[i] = gauss(rng);
      v[i] = gauss(rng);
      w[i] = gauss(rng);
      nu += u[i] * u[i];
      nv += v[i] * v[i];
      nw += w[i] * w[i];
    }
    double denom = std::sqrt(nu * nv * nw);
    if (denom > 0.0) {
      double r = std::abs(V.third(z.data(), u.data(), v.data(), w.data())) / denom;
      rep.sup_third_ratio = std::max(rep.sup_third_ratio, r);
      if (r > V.M() + tol) {
        rep.ok = false;
        if (rep.witness.empty()) rep.witness = z;
      }
    }
  }
  return rep;
}

std::vector<double> contraction_field(const Potential& V, const VectorField& omega) {
  const TorusLattice& lat = *omega.lat;
  const int d = lat.dim();
  const auto n = lat.sites();
  std::vector<double> out(static_cast<std::size_t>(n) * d * d);
  double z[kMaxDim];
  for (std::int64_t i = 0; i < n; i++) {
    for (int c = 0; c < d; c++) z[c] = omega.at(c, i);
    V.contraction(z, out.data() + i * d * d);
  }
  return out;
}

}  // namespace gradlab
