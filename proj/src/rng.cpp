#include "nls/rng.hpp"

#include <cmath>
#include <numbers>

#include "nls/fft.hpp"
#include "nls/kernels.hpp"
#include "nls/spectral.hpp"

namespace nls {

double SeededRng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

ComplexField random_smooth_field(const GridSpec& g, SeededRng& rng, double k0) {
  const auto ks = wavenumber_table(g);
  const auto str = g.strides();
  const std::size_t size = g.size();
  std::vector<cplx> hat(size);
  const double inv_k02 = 1.0 / (k0 * k0);
  for (std::size_t p = 0; p < size; ++p) {  // serial: sequence must be seed-stable
    double k2 = 0.0;
    for (int a = 0; a < g.d; ++a) {
      const double ka = ks[(p / str[a]) % static_cast<std::size_t>(g.n)];
      k2 += ka * ka;
    }
    const double env = std::exp(-k2 * inv_k02);
    hat[p] = env * cplx{rng.normal(), rng.normal()};
  }
  ComplexField f(g);
  transform_for(g).inverse(hat, f.values);
  const double norm = lp_norm(f, 2.0);
  if (norm > 0.0) kernels::scale(std::span<cplx>(f.values), 1.0 / norm);
  return f;
}

}  // namespace nls
