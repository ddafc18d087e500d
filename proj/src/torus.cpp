#include "gradlab/torus.hpp"

#include <cmath>
#include <stdexcept>

#include "gradlab/simd/kernels.hpp"

namespace gradlab {

TorusLattice::TorusLattice(int d, int L) : d_(d), L_(L) {
  if (d < 1 || d > kMaxDim) throw std::domain_error("TorusLattice: dimension out of range");
  if (L < 2 || L % 2 != 0) throw std::domain_error("TorusLattice: L must be a positive even integer");
  n_ = 1;
  for (int a = d_ - 1; a >= 0; a--) {
    stride_[a] = n_;
    n_ *= L_;
  }
}

std::int64_t TorusLattice::index(const Coords& c) const {
  std::int64_t idx = 0;
  for (int a = 0; a < d_; a++) {
    int m = ((c[a] % L_) + L_) % L_;
    idx += m * stride_[a];
  }
  return idx;
}

Coords TorusLattice::coords(std::int64_t site) const {
  if (site < 0 || site >= n_) throw std::domain_error("TorusLattice: invalid site");
  Coords c{};
  for (int a = 0; a < d_; a++) {
    int m = static_cast<int>((site / stride_[a]) % L_);
    c[a] = m < L_ / 2 ? m : m - L_;
  }
  return c;
}

std::int64_t TorusLattice::neighbor(std::int64_t site, int axis, int dir) const {
  int m = static_cast<int>((site / stride_[axis]) % L_);
  int m2 = ((m + dir) % L_ + L_) % L_;
  return site + (m2 - m) * stride_[axis];
}

std::int64_t TorusLattice::shifted(std::int64_t site, const Coords& x) const {
  std::int64_t idx = site;
  for (int a = 0; a < d_; a++) {
    int m = static_cast<int>((site / stride_[a]) % L_);
    int m2 = ((m + x[a]) % L_ + L_) % L_;
    idx += (m2 - m) * stride_[a];
  }
  return idx;
}

double TorusLattice::norm(std::int64_t site) const {
  Coords c = coords(site);
  double s = 0.0;
  for (int a = 0; a < d_; a++) s += double(c[a]) * c[a];
  return std::sqrt(s);
}

double TorusLattice::periodic_distance(std::int64_t y, std::int64_t z) const {
  Coords cy = coords(y), cz = coords(z);
  // canonical representatives are within one period, so minimizing each
  // axis over {-L, 0, +L} covers all 3^d relevant images
  double s = 0.0;
  for (int a = 0; a < d_; a++) {
    int dd = cy[a] - cz[a];
    int best = std::abs(dd);
    for (int im = -1; im <= 1; im++) best = std::min(best, std::abs(dd + im * L_));
    s += double(best) * best;
  }
  return std::sqrt(s);
}

Weight Weight::one_point(double alpha) { return Weight(false, alpha, 0.0); }
Weight Weight::two_point(double alpha, double beta) { return Weight(true, alpha, beta); }

void Weight::validate(int d) const {
  if (std::abs(alpha_) >= d) throw std::domain_error("Weight: |alpha| must be < d");
  if (two_point_ && std::abs(beta_) >= d) throw std::domain_error("Weight: |beta| must be < d");
}

double Weight::operator()(const TorusLattice& lat, std::int64_t y) const {
  if (two_point_) throw std::domain_error("Weight: two-point weight needs (y, z)");
  if (alpha_ == 0.0) return 1.0;
  return std::pow(1.0 + lat.norm(y), alpha_);
}

double Weight::operator()(const TorusLattice& lat, std::int64_t y, std::int64_t z) const {
  if (!two_point_) throw std::domain_error("Weight: one-point weight takes a single site");
  double w = alpha_ == 0.0 ? 1.0 : std::pow(1.0 + lat.norm(y), alpha_);
  if (beta_ != 0.0) w *= std::pow(1.0 + lat.periodic_distance(y, z), beta_);
  return w;
}

TwoPointField::TwoPointField(const TorusLattice& l, int ncomp_) : lat(&l), ncomp(ncomp_) {
  if (l.dim() == 2 && l.side() > 32)
    throw std::length_error("TwoPointField: L <= 32 required in d=2 (N^2 storage)");
  v.assign(static_cast<std::size_t>(pairs()) * ncomp, 0.0);
}

LatticeField translate(const LatticeField& h, const Coords& x) {
  LatticeField out(*h.lat);
  const auto n = h.lat->sites();
  for (std::int64_t i = 0; i < n; i++) out.v[i] = h.v[h.lat->shifted(i, x)];
  return out;
}

VectorField translate(const VectorField& h, const Coords& x) {
  VectorField out(*h.lat);
  const auto n = h.lat->sites();
  for (int c = 0; c < h.lat->dim(); c++) {
    const double* src = h.comp(c);
    double* dst = out.comp(c);
    for (std::int64_t i = 0; i < n; i++) dst[i] = src[h.lat->shifted(i, x)];
  }
  return out;
}

double norm2(const LatticeField& f) { return simd::active().sumsq(f.v.data(), f.v.size()); }
double norm2(const VectorField& f) { return simd::active().sumsq(f.v.data(), f.v.size()); }
double norm2(const TwoPointField& f) { return simd::active().sumsq(f.v.data(), f.v.size()); }

double dot(const LatticeField& a, const LatticeField& b) {
  return simd::active().dot(a.v.data(), b.v.data(), a.v.size());
}
double dot(const VectorField& a, const VectorField& b) {
  return simd::active().dot(a.v.data(), b.v.data(), a.v.size());
}

double weighted_norm2(const VectorField& f, const Weight& w) {
  w.validate(f.lat->dim());
  const auto n = f.lat->sites();
  double acc = 0.0;
  for (std::int64_t i = 0; i < n; i++) {
    double wi = w(*f.lat, i);
    for (int c = 0; c < f.lat->dim(); c++) acc += wi * f.at(c, i) * f.at(c, i);
  }
  return acc;
}

double weighted_norm2(const TwoPointField& f, const Weight& w) {
  w.validate(f.lat->dim());
  const auto n = f.lat->sites();
  double acc = 0.0;
  for (std::int64_t y = 0; y < n; y++)
    for (std::int64_t z = 0; z < n; z++) {
      double wi = w(*f.lat, y, z);
      for (int c = 0; c < f.ncomp; c++) acc += wi * f.at(c, y, z) * f.at(c, y, z);
    }
  return acc;
}

}  // namespace gradlab
