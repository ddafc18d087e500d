#pragma once

#include <complex>
#include <vector>

#include "gradlab/torus.hpp"

namespace gradlab {

using cplx = std::complex<double>;

// In-place multidimensional DFT, row-major dims.  sign = -1 forward,
// sign = +1 inverse; the inverse is normalized by 1/prod(dims).
void fft(std::vector<cplx>& data, const std::vector<int>& dims, int sign);

// Forward-difference symbol D_a(k) = e^{i k_a} - 1 with k_a = 2 pi n_a / L.
cplx diff_symbol(int n, int L);
// |D(k)|^2 = sum_a 2(1 - cos k_a) for the mode with flat index m over the
// lattice's row-major mode grid.
double laplace_symbol(const TorusLattice& lat, std::int64_t m);

}  // namespace gradlab
