#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "nls/ground_state.hpp"
#include "nls/kernels.hpp"
#include "nls/spectral.hpp"

using namespace nls;

namespace {
const RadialProfile& profile3() {
  static RadialProfile p = solve_shooting(3, 1e-10);
  return p;
}
}  // namespace

TEST_CASE("shooting d=3 pins the known amplitude and mass") {
  const RadialProfile& p = profile3();
  // values fixed by the bisection oracle at tol 1e-10 plus radial quadrature
  CHECK(p.q_values().front() == doctest::Approx(4.337387679977).epsilon(1e-9));
  GroundStateCertificate c = certify(p);
  CHECK(c.mass_q == doctest::Approx(18.897251302).epsilon(1e-8));
  CHECK(c.pohozaev_res1 < 1e-6);
  CHECK(c.pohozaev_res2 < 1e-6);
}

TEST_CASE("profile invariants and tail model") {
  const RadialProfile& p = profile3();
  const auto& q = p.q_values();
  for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i] < q[i - 1]);
  CHECK(q.front() > 0.0);
  CHECK(p.r_max() == doctest::Approx(30.0));
  CHECK(q.back() < 1e-9);
  CHECK(p.tail().rate == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(std::abs(p.qp_values().front()) < 1e-10);
  // interpolation matches samples and decays through r_max
  CHECK(p.value(p.r_samples()[1234]) == doctest::Approx(q[1234]).epsilon(1e-12));
  CHECK(p.value(31.0) < p.value(29.9));
}

TEST_CASE("radial ODE residual at collocation points") {
  const RadialProfile& p = profile3();
  const auto& r = p.r_samples();
  const auto& q = p.q_values();
  const auto& qp = p.qp_values();
  const double h = r[1] - r[0];
  // 6th-order interior stencil for Q''
  double worst = 0.0;
  for (std::size_t i = 3; i + 3 < r.size(); i += 7) {
    const double qpp = (2.0 * q[i - 3] - 27.0 * q[i - 2] + 270.0 * q[i - 1] - 490.0 * q[i] +
                        270.0 * q[i + 1] - 27.0 * q[i + 2] + 2.0 * q[i + 3]) /
                       (180.0 * h * h);
    const double res = qpp + 2.0 / r[i] * qp[i] - q[i] + q[i] * q[i] * q[i];
    worst = std::max(worst, std::abs(res));
  }
  CHECK(worst < 10.0 * 1e-10);
}

TEST_CASE("certificate consequence identities") {
  GroundStateCertificate c = certify(profile3());
  // the two Pohozaev identities force these
  CHECK(c.grad_sq == doctest::Approx(3.0 * c.mass_q).epsilon(1e-6));
  CHECK(c.potential_norm == doctest::Approx(4.0 * c.mass_q).epsilon(1e-6));
  CHECK(c.energy_q == doctest::Approx(0.5 * c.mass_q).epsilon(1e-6));
  CHECK(c.threshold_me == doctest::Approx(0.5 * c.mass_q * c.mass_q).epsilon(1e-6));
  CHECK(c.threshold_l2h1 == doctest::Approx(std::sqrt(c.mass_q * c.grad_sq)).epsilon(1e-12));
  // both sharp-constant routes agree (also enforced inside certify)
  const double c0_direct =
      c.potential_norm / (std::pow(c.mass_q, 0.5) * std::pow(c.grad_sq, 1.5));
  CHECK(c.c0 == doctest::Approx(c0_direct).epsilon(1e-6));
}

TEST_CASE("shooting works in d = 4 and 5") {
  for (int d : {4, 5}) {
    RadialProfile p = solve_shooting(d, 1e-10);
    GroundStateCertificate c = certify(p);
    CHECK(c.pohozaev_res1 < 1e-6);
    CHECK(c.pohozaev_res2 < 1e-6);
    CHECK(c.grad_sq == doctest::Approx(d * c.mass_q).epsilon(1e-6));
    CHECK(c.potential_norm == doctest::Approx((d + 1) * c.mass_q).epsilon(1e-6));
  }
  CHECK_THROWS_AS(solve_shooting(6, 1e-10), std::invalid_argument);
}

TEST_CASE("petviashvili converges and satisfies the weak form") {
  // dx <= 0.25 keeps the discrete tail below the boundary-resolution guard
  GridSpec g(3, 96, 12.0);
  const double tol = 1e-9;
  ComplexField w = solve_petviashvili(g, tol);
  // residual || -Lap w + w - w^3 ||_2 / ||w||_2
  ComplexField lap = fractional_derivative(w, 2.0);
  std::vector<cplx> res(w.values.size());
  for (std::size_t i = 0; i < res.size(); ++i) {
    const double a = std::abs(w.values[i]);
    res[i] = lap.values[i] + w.values[i] - a * a * w.values[i];
  }
  CHECK(lp_norm(ComplexField(g, res), 2.0) / lp_norm(w, 2.0) < 10.0 * tol);

  // any positive gaussian seed reaches the same fixed point
  ComplexField w2 = solve_petviashvili(g, tol, 1.0, 1.5);
  CHECK(kernels::max_abs_diff(w.values, w2.values) / kernels::max_abs(w.values) < 1e-6);
}

TEST_CASE("shooting and petviashvili agree after grid embedding") {
  // dx <= 0.19 so the Fourier tail of Q clears the 1e-3 comparison floor
  GridSpec g(3, 128, 12.0);
  ComplexField w = solve_petviashvili(g, 1e-9);
  ComplexField qe = embed_on_grid(profile3(), g);
  const double gap = kernels::max_abs_diff(w.values, qe.values) / kernels::max_abs(qe.values);
  CHECK(gap < 1e-3);
}

TEST_CASE("petviashvili rejects a box that cannot hold the tail") {
  GridSpec g(3, 32, 3.0);
  CHECK_THROWS(solve_petviashvili(g, 1e-9));
}

TEST_CASE("certificate and profile serialization round-trip") {
  GroundStateCertificate c = certify(profile3());
  const auto dir = std::filesystem::temp_directory_path() / "nls_gs_test";
  std::filesystem::create_directories(dir);
  write_certificate_json(dir / "certificate.json", c);
  GroundStateCertificate c2 = read_certificate_json(dir / "certificate.json");
  CHECK(c2.d == c.d);
  CHECK(c2.mass_q == c.mass_q);
  CHECK(c2.c0 == c.c0);
  CHECK(c2.threshold_l2h1 == c.threshold_l2h1);
  write_profile_csv(dir / "profile.csv", profile3());
  CHECK(std::filesystem::file_size(dir / "profile.csv") > 1000);
}
