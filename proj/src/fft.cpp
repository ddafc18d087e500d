#include "gradlab/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <numbers>

namespace gradlab {

void fft(std::vector<cplx>& data, const std::vector<int>& dims, int sign) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()),
                                 dims.data(), p, p,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  if (sign > 0) {
    double scale = 1.0;
    for (int d : dims) scale *= d;
    scale = 1.0 / scale;
    for (auto& z : data) z *= scale;
  }
}

cplx diff_symbol(int n, int L) {
  double k = 2.0 * std::numbers::pi * n / L;
  return cplx(std::cos(k) - 1.0, std::sin(k));
}

double laplace_symbol(const TorusLattice& lat, std::int64_t m) {
  double s = 0.0;
  for (int a = 0; a < lat.dim(); a++) {
    int n = static_cast<int>((m / lat.stride(a)) % lat.side());
    double k = 2.0 * std::numbers::pi * n / lat.side();
    s += 2.0 * (1.0 - std::cos(k));
  }
  return s;
}

}  // namespace gradlab
