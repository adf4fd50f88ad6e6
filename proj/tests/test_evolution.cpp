#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nls/evolution.hpp"
#include "nls/ground_state.hpp"
#include "nls/kernels.hpp"
#include "nls/spectral.hpp"
#include "nls/variational.hpp"

using namespace nls;

namespace {

const RadialProfile& profile3() {
  static RadialProfile p = solve_shooting(3, 1e-10);
  return p;
}

// lambda-scaled soliton representative: resolvable on affordable grids and
// still an exact solution, u(t) = e^{i lambda^2 t} Q_lambda.
ComplexField scaled_soliton(const GridSpec& g, double lam, double amp = 1.0) {
  const RadialProfile& p = profile3();
  return sample_field(g, [&, lam, amp](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return cplx{amp * std::pow(lam, 0.5 * (g.d - 1)) * p.value(lam * std::sqrt(r2)), 0.0};
  });
}

double h1_diff(const ComplexField& a, const ComplexField& b) {
  std::vector<cplx> d(a.values.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values[i] - b.values[i];
  return h1_norm(ComplexField(a.grid, d));
}

}  // namespace

TEST_CASE("strang step: modulus-preserving nonlinear phase and phase cap") {
  GridSpec g(3, 32, 8.0);
  ComplexField u = gaussian_field(g, 1.0, 1.2);
  ComplexField v = strang_step(u, 1e-2, false);
  CHECK(lp_norm(v, 2.0) == doctest::Approx(lp_norm(u, 2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(strang_step(u, 1.0, false), PhaseCapError);
}

TEST_CASE("time reversibility of the splitting") {
  GridSpec g(3, 32, 8.0);
  ComplexField u0 = gaussian_field(g, 0.9, 1.3);
  ComplexField u = u0;
  const double dt = 5e-3;
  for (int i = 0; i < 10; ++i) u = strang_step(u, dt, false);
  for (int i = 0; i < 10; ++i) u = strang_step(u, -dt, false);
  CHECK(kernels::max_abs_diff(u.values, u0.values) < 1e-10);
}

TEST_CASE("zero data stays zero") {
  GridSpec g(3, 32, 8.0);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 0.2;
  TrajectoryRecord r = evolve(ComplexField(g), cfg);
  CHECK(r.status == RunStatus::completed);
  for (double m : r.mass_series) CHECK(m == 0.0);
  for (double e : r.energy_series) CHECK(e == 0.0);
}

TEST_CASE("soliton conservation and phase rotation") {
  // resolvable representative via the scaling symmetry; dealias off keeps
  // both sub-flows exactly unitary
  const double lam = 0.35;
  GridSpec g(3, 96, 14.0);
  ComplexField u0 = scaled_soliton(g, lam);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 5e-3;
  cfg.t_end = 0.5;
  cfg.checkpoint_stride = 100;
  cfg.dealias = false;
  TrajectoryRecord r = evolve(u0, cfg);
  CHECK(r.status == RunStatus::completed);

  const double m0 = r.mass_series.front();
  const double e0 = r.energy_series.front();
  double dm = 0.0, de = 0.0;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    dm = std::max(dm, std::abs(r.mass_series[i] - m0) / m0);
    de = std::max(de, std::abs(r.energy_series[i] - e0) / std::abs(e0));
  }
  CHECK(dm < 1e-8);
  CHECK(de < 1e-7);

  ComplexField uf = r.load_snapshot(r.snapshot_paths.size() - 1);
  ComplexField ref = u0;
  const double phase = lam * lam * cfg.t_end;
  kernels::scale(std::span<cplx>(ref.values), cplx{std::cos(phase), std::sin(phase)});
  CHECK(h1_diff(uf, ref) < 2e-2);
}

TEST_CASE("small data disperses without tripping the guard") {
  GridSpec g(3, 48, 12.0);
  ComplexField u0 = embed_on_grid(profile3(), g);
  kernels::scale(std::span<cplx>(u0.values), 0.1);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 1.0;
  cfg.checkpoint_stride = 25;
  TrajectoryRecord r = evolve(u0, cfg);
  CHECK(r.status == RunStatus::completed);
  CHECK(r.grad_series.back() < r.grad_series.front());
}

TEST_CASE("automatic halving under the phase cap") {
  GridSpec g(3, 32, 8.0);
  ComplexField u0 = gaussian_field(g, 1.3, 1.2);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 0.35;  // dt max|u|^2 starts above the cap
  cfg.t_end = 0.7;
  cfg.max_phase = 0.4;
  TrajectoryRecord r = evolve(u0, cfg);
  CHECK(r.status == RunStatus::completed);
  CHECK(r.dt_series.back() < cfg.dt);
}

TEST_CASE("blow-up guard terminates and labels the run") {
  GridSpec g(3, 32, 8.0);
  ComplexField u0 = embed_on_grid(profile3(), g);
  kernels::scale(std::span<cplx>(u0.values), 1.5);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 2e-3;
  cfg.t_end = 2.0;
  cfg.blowup_factor = 1.05;  // tight guard: focusing growth trips it quickly
  TrajectoryRecord r = evolve(u0, cfg);
  CHECK(r.status == RunStatus::blowup_suspected);
  CHECK(r.times.back() < cfg.t_end);
}

TEST_CASE("truncation policy: flag vs abort") {
  GridSpec g(3, 32, 6.0);
  // a wide gaussian has visible mass outside the half box from the start
  ComplexField u0 = gaussian_field(g, 0.5, 2.0);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 0.1;
  TrajectoryRecord r = evolve(u0, cfg);
  CHECK(r.status == RunStatus::completed);
  CHECK_FALSE(r.valid_truncation);

  cfg.truncation_policy = TruncationPolicy::abort;
  TrajectoryRecord r2 = evolve(u0, cfg);
  CHECK(r2.status == RunStatus::truncation_exceeded);
}

TEST_CASE("resume from a checkpoint reproduces the uninterrupted run") {
  GridSpec g(3, 32, 8.0);
  ComplexField u0 = gaussian_field(g, 0.8, 1.3);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 1.0 / 128.0;
  cfg.t_end = 0.5;
  cfg.checkpoint_stride = 16;
  TrajectoryRecord full = evolve(u0, cfg);

  EvolveConfig half = cfg;
  half.t_end = 0.25;
  TrajectoryRecord first = evolve(u0, half);
  ComplexField mid = first.load_snapshot(first.snapshot_paths.size() - 1);
  CHECK(mid.time_tag.value() == doctest::Approx(0.25));
  TrajectoryRecord second = evolve(mid, cfg, 0.25, ResumeOptions{0, true});

  ComplexField a = full.load_snapshot(full.snapshot_paths.size() - 1);
  ComplexField b = second.load_snapshot(second.snapshot_paths.size() - 1);
  CHECK(kernels::max_abs_diff(a.values, b.values) < 1e-12);
}

TEST_CASE("galilean boost: contract and invariances") {
  GridSpec g(3, 32, 8.0);
  ComplexField u = gaussian_field(g, 0.8, 1.2);
  const double unit = g.lattice_unit();

  const double zero3[3] = {0.0, 0.0, 0.0};
  ComplexField ub0 = galilean_boost(u, zero3);
  CHECK(kernels::max_abs_diff(ub0.values, u.values) == 0.0);

  const double v[3] = {2 * unit, -unit, 0.0};
  ComplexField ub = galilean_boost(u, v);
  CHECK(mass(ub) == doctest::Approx(mass(u)).epsilon(1e-13));
  std::vector<double> m1(u.values.size()), m2(u.values.size());
  kernels::abs2(u.values, m1);
  kernels::abs2(ub.values, m2);
  double worst = 0.0;
  for (std::size_t i = 0; i < m1.size(); ++i) worst = std::max(worst, std::abs(m1[i] - m2[i]));
  CHECK(worst < 1e-14);

  const double off[3] = {0.5 * unit, 0.0, 0.0};
  CHECK_THROWS_AS(galilean_boost(u, off), std::invalid_argument);
}

TEST_CASE("boost commutes with the flow up to the exact Galilean transform") {
  GridSpec g(3, 64, 12.0);
  ComplexField u0 = gaussian_field(g, 0.8, 1.5);
  const double unit = g.lattice_unit();
  const double v[3] = {2 * unit, -unit, 0.0};
  const double t_end = 0.5;
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 2.5e-3;
  cfg.t_end = t_end;
  cfg.checkpoint_stride = 100000;
  cfg.dealias = false;  // the mask is not shift-covariant

  TrajectoryRecord ra = evolve(galilean_boost(u0, v), cfg);
  ComplexField ua = ra.load_snapshot(ra.snapshot_paths.size() - 1);

  TrajectoryRecord rb = evolve(u0, cfg);
  ComplexField ub = rb.load_snapshot(rb.snapshot_paths.size() - 1);
  const double shift[3] = {2 * t_end * v[0], 2 * t_end * v[1], 2 * t_end * v[2]};
  ComplexField ubt = spectral_translate(ub, shift);
  ComplexField ubb = galilean_boost(ubt, v);
  const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  kernels::scale(std::span<cplx>(ubb.values),
                 cplx{std::cos(-t_end * v2), std::sin(-t_end * v2)});
  CHECK(kernels::max_abs_diff(ua.values, ubb.values) < 1e-7);
}

TEST_CASE("rescale to mass = energy") {
  GridSpec g(3, 48, 12.0);
  ComplexField u = gaussian_field(g, 0.8, 1.5);
  const double me = mass(u) * energy(u);
  const double hhalf = sobolev_seminorm(u, 0.5);
  auto [ul, lambda] = rescale_mass_energy(u);
  CHECK(mass(ul) == doctest::Approx(energy(ul)).epsilon(1e-10));
  CHECK(mass(ul) * energy(ul) == doctest::Approx(me).epsilon(1e-6));
  CHECK(sobolev_seminorm(ul, 0.5) == doctest::Approx(hhalf).epsilon(1e-6));
  CHECK(lambda == doctest::Approx(std::sqrt(mass(u) / energy(u))));

  // already normalized input: lambda = 1 and the field is untouched
  auto [ul2, lambda2] = rescale_mass_energy(ul);
  CHECK(lambda2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kernels::max_abs_diff(ul2.values, ul.values) < 1e-12);

  // E <= 0 has no normalization
  ComplexField strong = gaussian_field(g, 3.0, 1.0);
  CHECK(energy(strong) < 0.0);
  CHECK_THROWS_AS(rescale_mass_energy(strong), std::invalid_argument);
}

TEST_CASE("asymptotic state: free flow gives a null cauchy tail") {
  GridSpec g(3, 32, 10.0);
  ComplexField u0 = gaussian_field(g, 0.5, 1.4);
  TrajectoryRecord rec;
  rec.dir = std::filesystem::temp_directory_path() / "nls_asym_test";
  std::filesystem::create_directories(rec.dir);
  for (int i = 0; i <= 4; ++i) {
    ComplexField u = free_propagator(u0, 0.3 * i);
    u.time_tag = 0.3 * i;
    const auto path = rec.dir / ("free_" + std::to_string(i) + ".nlsf");
    write_nlsf(path, u);
    rec.snapshot_times.push_back(0.3 * i);
    rec.snapshot_paths.push_back(path);
  }
  AsymptoticState st = asymptotic_state(rec);
  for (double t : st.cauchy_tail) CHECK(t < 1e-10);

  rec.snapshot_paths.resize(2);
  rec.snapshot_times.resize(2);
  CHECK_THROWS_AS(asymptotic_state(rec), std::invalid_argument);
}

TEST_CASE("asymptotic state: soliton tail is bounded away from zero, small data decays") {
  const double lam = 0.4;
  GridSpec g(3, 48, 12.0);
  EvolveConfig cfg;
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 3.0;
  cfg.checkpoint_stride = 50;
  cfg.dealias = false;

  TrajectoryRecord sol = evolve(scaled_soliton(g, lam), cfg);
  AsymptoticState ssol = asymptotic_state(sol);
  double smin = inf;
  for (double t : ssol.cauchy_tail) smin = std::min(smin, t);
  // the free flow never catches a soliton: every increment stays macroscopic
  CHECK(smin > 0.05);

  ComplexField tiny = embed_on_grid(profile3(), g);
  kernels::scale(std::span<cplx>(tiny.values), 0.1);
  TrajectoryRecord small = evolve(tiny, cfg);
  AsymptoticState ssmall = asymptotic_state(small);
  const auto& tail = ssmall.cauchy_tail;
  // decreasing over the final half of the run
  for (std::size_t i = tail.size() / 2 + 1; i < tail.size(); ++i)
    CHECK(tail[i] < tail[i - 1] * 1.05);
  CHECK(tail.back() < 0.5 * tail.front());
}
