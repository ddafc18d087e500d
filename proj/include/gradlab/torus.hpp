#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace gradlab {

constexpr int kMaxDim = 4;

using Coords = std::array<int, kMaxDim>;

// Periodic cube of side L (even) in d dimensions.  Sites are flat indices in
// row-major coordinate order; canonical coordinate representatives live in
// [-L/2, L/2)^d so that |y| peaks at the origin.
class TorusLattice {
 public:
  TorusLattice(int d, int L);

  int dim() const { return d_; }
  int side() const { return L_; }
  std::int64_t sites() const { return n_; }

  // stride of axis a in the flat index
  std::int64_t stride(int a) const { return stride_[a]; }

  // flat index from coordinates (any integers; wrapped periodically)
  std::int64_t index(const Coords& c) const;
  // canonical coordinates in [-L/2, L/2)^d
  Coords coords(std::int64_t site) const;

  std::int64_t neighbor(std::int64_t site, int axis, int dir) const;

  // site shifted by +x (used by translations)
  std::int64_t shifted(std::int64_t site, const Coords& x) const;

  // Euclidean norm of the canonical representative
  double norm(std::int64_t site) const;
  // gamma(y, z): minimum over periodic images of the Euclidean distance
  double periodic_distance(std::int64_t y, std::int64_t z) const;

  bool operator==(const TorusLattice& o) const { return d_ == o.d_ && L_ == o.L_; }

 private:
  int d_;
  int L_;
  std::int64_t n_;
  std::array<std::int64_t, kMaxDim> stride_;
};

// Power-law weight w_alpha(y) = [1+|y|]^alpha, or the two-point variant
// w_{alpha,beta}(y,z) = [1+|y|]^alpha [1+gamma(y,z)]^beta.  Requires
// |alpha| < d (and |beta| < d) as in the operator-norm propositions; values
// are computed lazily, never tabulated.
class Weight {
 public:
  static Weight one_point(double alpha);
  static Weight two_point(double alpha, double beta);

  bool is_two_point() const { return two_point_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  void validate(int d) const;  // throws std::domain_error when out of range

  double operator()(const TorusLattice& lat, std::int64_t y) const;
  double operator()(const TorusLattice& lat, std::int64_t y, std::int64_t z) const;

 private:
  Weight(bool two_point, double alpha, double beta)
      : two_point_(two_point), alpha_(alpha), beta_(beta) {}
  bool two_point_;
  double alpha_;
  double beta_;
};

// Scalar field on the torus.
struct LatticeField {
  const TorusLattice* lat = nullptr;
  std::vector<double> v;

  LatticeField() = default;
  explicit LatticeField(const TorusLattice& l) : lat(&l), v(l.sites(), 0.0) {}
  double& operator[](std::int64_t i) { return v[i]; }
  double operator[](std::int64_t i) const { return v[i]; }
};

// d-component field, component-major storage (component c occupies a
// contiguous block of lat->sites() values).
struct VectorField {
  const TorusLattice* lat = nullptr;
  std::vector<double> v;

  VectorField() = default;
  explicit VectorField(const TorusLattice& l)
      : lat(&l), v(static_cast<std::size_t>(l.sites()) * l.dim(), 0.0) {}
  double* comp(int c) { return v.data() + static_cast<std::size_t>(lat->sites()) * c; }
  const double* comp(int c) const {
    return v.data() + static_cast<std::size_t>(lat->sites()) * c;
  }
  double& at(int c, std::int64_t i) { return comp(c)[i]; }
  double at(int c, std::int64_t i) const { return comp(c)[i]; }
};

// Field on Q x Q with `ncomp` real components per ordered pair (y, z).
// Pair index p = y * N + z; component-major storage.  Memory grows as N^2,
// so construction is capped at L <= 32 for d = 2.
struct TwoPointField {
  const TorusLattice* lat = nullptr;
  int ncomp = 0;
  std::vector<double> v;

  TwoPointField() = default;
  TwoPointField(const TorusLattice& l, int ncomp_);
  std::int64_t pairs() const { return lat->sites() * lat->sites(); }
  double* comp(int c) { return v.data() + static_cast<std::size_t>(pairs()) * c; }
  const double* comp(int c) const {
    return v.data() + static_cast<std::size_t>(pairs()) * c;
  }
  double& at(int c, std::int64_t y, std::int64_t z) {
    return comp(c)[y * lat->sites() + z];
  }
  double at(int c, std::int64_t y, std::int64_t z) const {
    return comp(c)[y * lat->sites() + z];
  }
};

// (tau_x h)(z) = h(x + z), periodic.
LatticeField translate(const LatticeField& h, const Coords& x);
VectorField translate(const VectorField& h, const Coords& x);

double norm2(const LatticeField& f);
double norm2(const VectorField& f);
double norm2(const TwoPointField& f);
double dot(const LatticeField& a, const LatticeField& b);
double dot(const VectorField& a, const VectorField& b);

// Weighted squared norms sum w * |value|^2 (one-point weight on site fields,
// two-point weight on pair fields).
double weighted_norm2(const VectorField& f, const Weight& w);
double weighted_norm2(const TwoPointField& f, const Weight& w);

}  // namespace gradlab
