#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nls/kernels.hpp"
#include "nls/rng.hpp"

using nls::cplx;
namespace k = nls::kernels;

namespace {
std::vector<cplx> random_vec(std::size_t n, std::uint64_t seed) {
  nls::SeededRng rng(seed);
  std::vector<cplx> v(n);
  for (auto& z : v) z = cplx{rng.normal(), rng.normal()};
  return v;
}
}  // namespace

TEST_CASE("parallel reductions match the serial reference") {
  // odd size exercises the partial last block
  const std::size_t n = 3 * k::reduce_block + 137;
  auto a = random_vec(n, 1);
  auto b = random_vec(n, 2);

  CHECK(k::sum_abs2(a) == doctest::Approx(k::ref::sum_abs2(a)).epsilon(1e-13));
  CHECK(k::sum_abs_pow(a, 3.5) == doctest::Approx(k::ref::sum_abs_pow(a, 3.5)).epsilon(1e-13));
  CHECK(k::max_abs(a) == doctest::Approx(k::ref::max_abs(a)).epsilon(1e-15));

  const cplx d_par = k::dot(std::span<const cplx>(a), std::span<const cplx>(b));
  const cplx d_ref = k::ref::dot(a, b);
  CHECK(std::abs(d_par - d_ref) <= 1e-13 * std::abs(d_ref));

  std::vector<double> ra(n), rb(n);
  for (std::size_t i = 0; i < n; ++i) {
    ra[i] = a[i].real();
    rb[i] = b[i].real();
  }
  CHECK(k::sum(ra) == doctest::Approx(k::ref::sum(ra)).epsilon(1e-13));
  CHECK(k::dot(std::span<const double>(ra), std::span<const double>(rb)) ==
        doctest::Approx(k::ref::dot(ra, rb)).epsilon(1e-13));
}

TEST_CASE("reduction result does not depend on block boundaries being hit exactly") {
  for (std::size_t n : {std::size_t(1), k::reduce_block - 1, k::reduce_block,
                        k::reduce_block + 1, 2 * k::reduce_block + 7}) {
    auto a = random_vec(n, 7 + n);
    CHECK(k::sum_abs2(a) == doctest::Approx(k::ref::sum_abs2(a)).epsilon(1e-13));
  }
}

TEST_CASE("nonlinear phase preserves modulus exactly") {
  auto v = random_vec(10000, 3);
  std::vector<double> mod_before(v.size());
  k::abs2(v, mod_before);
  k::nonlinear_phase(v, 0.37, 2.0);
  std::vector<double> mod_after(v.size());
  k::abs2(v, mod_after);
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    worst = std::max(worst, std::abs(mod_after[i] - mod_before[i]));
  CHECK(worst <= 1e-15 * k::ref::max_abs(v) * k::ref::max_abs(v));
}

TEST_CASE("parallel nonlinear phase matches serial reference") {
  auto v = random_vec(20000, 5);
  auto w = v;
  k::nonlinear_phase(v, 0.1, 2.0);
  k::ref::nonlinear_phase(w, 0.1, 2.0);
  CHECK(k::max_abs_diff(v, w) == 0.0);
}

TEST_CASE("pointwise product maps") {
  auto a = random_vec(5000, 11);
  auto b = random_vec(5000, 12);
  std::vector<double> im(a.size()), re(a.size());
  k::im_conj_prod(a, b, im);
  k::re_conj_prod(a, b, re);
  for (std::size_t i : {std::size_t(0), std::size_t(117), std::size_t(4999)}) {
    const cplx p = std::conj(a[i]) * b[i];
    CHECK(im[i] == doctest::Approx(p.imag()).epsilon(1e-14));
    CHECK(re[i] == doctest::Approx(p.real()).epsilon(1e-14));
  }
}
