#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nls/fft.hpp"
#include "nls/kernels.hpp"
#include "nls/rng.hpp"
#include "nls/spectral.hpp"

using namespace nls;
using std::numbers::pi;

namespace {
GridSpec small_grid() { return GridSpec(3, 32, 8.0); }

ComplexField random_field(const GridSpec& g, std::uint64_t seed) {
  SeededRng rng(seed);
  return random_smooth_field(g, rng, 0.5 * pi / g.l * g.n / 4);
}
}  // namespace

TEST_CASE("gradient of a constant vanishes") {
  GridSpec g = small_grid();
  ComplexField f(g);
  for (auto& z : f.values) z = cplx{2.5, -1.0};
  auto grad = gradient(f);
  for (const auto& df : grad) CHECK(kernels::max_abs(df.values) <= 1e-12);
}

TEST_CASE("plane wave is a gradient eigenfunction") {
  GridSpec g = small_grid();
  const double unit = g.lattice_unit();
  const double v[3] = {2 * unit, -1 * unit, 3 * unit};
  ComplexField f = plane_wave(g, v);
  auto grad = gradient(f);
  for (int a = 0; a < 3; ++a) {
    ComplexField expect = f;
    kernels::scale(std::span<cplx>(expect.values), cplx{0.0, v[a]});
    CHECK(kernels::max_abs_diff(grad[a].values, expect.values) <= 1e-10);
  }
}

TEST_CASE("gradient of a gaussian matches the closed form") {
  GridSpec g(3, 128, 12.0);
  const double amp = 1.3;
  ComplexField f = gaussian_field(g, amp, 1.0);
  auto grad = gradient(f);
  // d/dx_k A exp(-|x|^2/2) = -x_k f
  const auto xs = coord_table(g);
  const auto str = g.strides();
  for (int a = 0; a < 3; ++a) {
    double worst = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double x = xs[(p / str[a]) % static_cast<std::size_t>(g.n)];
      worst = std::max(worst, std::abs(grad[a].values[p] - (-x) * f.values[p]));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("fractional derivative basics") {
  GridSpec g = small_grid();
  ComplexField f = random_field(g, 42);

  ComplexField id = fractional_derivative(f, 0.0);
  CHECK(kernels::max_abs_diff(id.values, f.values) <= 1e-12);

  const double unit = g.lattice_unit();
  const double v[3] = {1 * unit, 2 * unit, 0.0};
  ComplexField pw = plane_wave(g, v);
  ComplexField half = fractional_derivative(pw, 0.5);
  const double kv = std::sqrt(v[0] * v[0] + v[1] * v[1]);
  ComplexField expect = pw;
  kernels::scale(std::span<cplx>(expect.values), std::sqrt(kv));
  CHECK(kernels::max_abs_diff(half.values, expect.values) <= 1e-10);

  ComplexField twice = fractional_derivative(fractional_derivative(f, 0.5), 0.5);
  ComplexField once = fractional_derivative(f, 1.0);
  CHECK(kernels::max_abs_diff(twice.values, once.values) <=
        1e-12 * std::max(1.0, kernels::max_abs(once.values)));
}

TEST_CASE("lp norms: constant field and gaussian closed forms") {
  GridSpec g = small_grid();
  ComplexField ones(g);
  for (auto& z : ones.values) z = cplx{1.0, 0.0};
  for (double p : {1.0, 2.0, 4.0})
    CHECK(lp_norm(ones, p) == doctest::Approx(std::pow(2.0 * g.l, 3.0 / p)).epsilon(1e-12));
  CHECK(lp_norm(ones, inf) == doctest::Approx(1.0));

  GridSpec gg(3, 64, 10.0);
  const double amp = 0.8;
  ComplexField gauss = gaussian_field(gg, amp, 1.0);
  CHECK(std::abs(lp_norm(gauss, 2.0) - amp * std::pow(pi, 0.75)) < 1e-8);
  CHECK(std::abs(lp_norm(gauss, 4.0) - amp * std::pow(pi / 2.0, 3.0 / 8.0)) < 1e-8);
}

TEST_CASE("free propagator: identity, unitarity, group law") {
  GridSpec g = small_grid();
  ComplexField f = random_field(g, 7);

  ComplexField f0 = free_propagator(f, 0.0);
  CHECK(kernels::max_abs_diff(f0.values, f.values) <= 1e-13);

  ComplexField ft = free_propagator(f, 0.7);
  CHECK(lp_norm(ft, 2.0) == doctest::Approx(lp_norm(f, 2.0)).epsilon(1e-12));
  // quadratic form sum |grad f|^2 is conserved as well
  auto gf = gradient(f);
  auto gt = gradient(ft);
  double qf = 0.0, qt = 0.0;
  for (int a = 0; a < 3; ++a) {
    qf += kernels::sum_abs2(gf[a].values);
    qt += kernels::sum_abs2(gt[a].values);
  }
  CHECK(qt == doctest::Approx(qf).epsilon(1e-12));

  ComplexField fts = free_propagator(ft, 0.4);
  ComplexField fsum = free_propagator(f, 1.1);
  CHECK(kernels::max_abs_diff(fts.values, fsum.values) <=
        1e-12 * std::max(1.0, kernels::max_abs(fsum.values)));
}

TEST_CASE("parseval identity on random fields") {
  GridSpec g = small_grid();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ComplexField f = random_field(g, seed);
    const double phys = kernels::sum_abs2(f.values);
    const double spec = spectral_l2sq(f);
    CHECK(spec == doctest::Approx(phys).epsilon(1e-12));
  }
}

TEST_CASE("momentum density of a real radial field vanishes") {
  GridSpec g = small_grid();
  ComplexField f = gaussian_field(g, 1.0, 1.5);
  auto grad = gradient(f);
  std::vector<double> im(f.values.size());
  for (int a = 0; a < 3; ++a) {
    kernels::im_conj_prod(f.values, grad[a].values, im);
    double worst = 0.0;
    for (double x : im) worst = std::max(worst, std::abs(x));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("H^1/2 norm is invariant under the critical rescaling") {
  GridSpec g(3, 48, 9.0);
  ComplexField f = random_field(g, 9);
  const double lambda = 1.7;
  // u_lambda(x) = lambda^((d-1)/2) u(lambda x) realized by grid re-scaling
  GridSpec gs(3, 48, g.l / lambda);
  ComplexField fs(gs, f.values);
  kernels::scale(std::span<cplx>(fs.values), std::pow(lambda, 1.0));
  CHECK(sobolev_seminorm(fs, 0.5) ==
        doctest::Approx(sobolev_seminorm(f, 0.5)).epsilon(1e-12));
}

TEST_CASE("spacetime norm: single snapshot and constant-in-time field") {
  GridSpec g = small_grid();
  ComplexField f = random_field(g, 13);

  TimedField one[] = {{0.0, &f}};
  NormSpec sup{inf, 4.0, 0.0};
  CHECK(spacetime_norm(one, sup, 0.0, 0.0) == doctest::Approx(lp_norm(f, 4.0)));

  std::vector<TimedField> series;
  for (int i = 0; i <= 10; ++i) series.push_back({0.2 * i, &f});
  NormSpec spec{5.0, 4.0, 0.0};
  const double expect = std::pow(2.0, 1.0 / 5.0) * lp_norm(f, 4.0);
  CHECK(spacetime_norm(series, spec, 0.0, 2.0) == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS(spacetime_norm(series, spec, 1.0, 1.0));
  CHECK_THROWS(spacetime_norm(series, spec, -1.0, 2.0));
}

TEST_CASE("free gaussian: windowed scattering-norm increments decay") {
  GridSpec g(3, 72, 18.0);
  ComplexField u0 = gaussian_field(g, 1.0, 1.0);
  // closed-form check of the free evolution at one point in time
  const double t = 0.8;
  ComplexField ut = free_propagator(u0, t);
  const cplx denom{1.0, 2.0 * t};  // width^2 = 1
  const auto xs = coord_table(g);
  const auto str = g.strides();
  double worst = 0.0;
  for (std::size_t p = 0; p < g.size(); p += 97) {
    double r2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double x = xs[(p / str[a]) % static_cast<std::size_t>(g.n)];
      r2 += x * x;
    }
    const cplx expect = std::pow(cplx{1.0, 0.0} / denom, 1.5) * std::exp(-r2 / (2.0 * denom));
    worst = std::max(worst, std::abs(ut.values[p] - expect));
  }
  CHECK(worst < 1e-7);

  // increments of the L^{2(d+2)/(d-1)}_{t,x} norm over successive unit windows
  std::vector<ComplexField> snaps;
  std::vector<TimedField> series;
  for (int i = 0; i <= 12; ++i) snaps.push_back(free_propagator(u0, 0.25 * i));
  for (int i = 0; i <= 12; ++i) series.push_back({0.25 * i, &snaps[i]});
  NormSpec spec{5.0, 5.0, 0.0};
  double prev = inf;
  for (int w = 0; w < 3; ++w) {
    const double cur = spacetime_norm(series, spec, w * 1.0, (w + 1) * 1.0);
    CHECK(cur <= prev * (1.0 + 1e-12));
    prev = cur;
  }
}
