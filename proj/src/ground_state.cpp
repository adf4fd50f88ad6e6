#include "nls/ground_state.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "nls/fft.hpp"
#include "nls/kernels.hpp"
#include "nls/spectral.hpp"
#include "nls/textio.hpp"

namespace nls {

using json = nlohmann::json;

double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double unit_ball_volume(int d) { return sphere_area(d) / d; }

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(int d, std::vector<double> r, std::vector<double> q,
                             std::vector<double> qp, RadialTail tail)
    : d_(d), r_(std::move(r)), q_(std::move(q)), qp_(std::move(qp)), tail_(tail),
      spline_(r_, q_, /*clamp_left=*/true, 0.0) {
  validate();
}

void RadialProfile::validate() const {
  if (r_.size() != q_.size() || r_.size() != qp_.size() || r_.size() < 8)
    throw std::invalid_argument("RadialProfile: inconsistent sample arrays");
  if (r_.front() != 0.0) throw std::invalid_argument("RadialProfile: samples must start at 0");
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (!(q_[i] > 0.0)) throw std::invalid_argument("RadialProfile: Q must be positive");
    if (i > 0 && !(q_[i] < q_[i - 1]))
      throw std::invalid_argument("RadialProfile: Q must be strictly decreasing");
  }
  if (std::abs(qp_.front()) > 1e-8 * q_.front())
    throw std::invalid_argument("RadialProfile: Q'(0) != 0");
  if (!(tail_.rate > 0.0)) throw std::invalid_argument("RadialProfile: tail rate must be positive");
}

double RadialProfile::value(double r) const {
  if (r <= r_max()) return spline_(r);
  return tail_.amplitude * std::pow(r, -0.5 * (d_ - 1)) * std::exp(-tail_.rate * r);
}

double RadialProfile::derivative(double r) const {
  if (r <= r_max()) return spline_.derivative(r);
  const double v = value(r);
  return v * (-tail_.rate - 0.5 * (d_ - 1) / r);
}

// ---------------------------------------------------------------------------
// shooting solve

namespace {

namespace ode = boost::numeric::odeint;
using lreal = long double;
using ShootState = std::array<lreal, 2>;  // (Q, Q')

constexpr double kRFar = 30.0;       // far end of the returned profile
constexpr double kR0 = 1e-6;         // series start radius
constexpr std::size_t kSamples = 7680;  // uniform mesh intervals on [0, 30]

struct RadialOde {
  int d;
  lreal p;
  void operator()(const ShootState& y, ShootState& dy, lreal r) const {
    dy[0] = y[1];
    const lreal q = y[0];
    const lreal nl = std::pow(std::abs(q), p - 1) * q;
    dy[1] = q - nl - (d - 1) / r * y[1];
  }
};

ShootState series_start(int d, lreal p, lreal q0) {
  // Q(r) = Q0 + (Q0 - Q0^p) r^2 / (2d) + O(r^4) removes the (d-1)/r singularity
  const lreal a = (q0 - std::pow(q0, p)) / (2.0L * d);
  return {q0 + a * kR0 * kR0, 2.0L * a * kR0};
}

enum class ShotOutcome { crosses_zero, turns_up };

ShotOutcome classify_shot(int d, lreal q0) {
  RadialOde sys{d, static_cast<lreal>(nonlinearity_power(d))};
  ShootState y = series_start(d, sys.p, q0);
  lreal r = kR0;
  lreal dt = 1e-4L;
  auto ctrl = ode::make_controlled<ode::runge_kutta_dopri5<ShootState, lreal>>(1e-15L, 1e-15L);
  while (r < kRFar) {
    if (ctrl.try_step(sys, y, r, dt) == ode::success) {
      if (y[0] <= 0.0L) return ShotOutcome::crosses_zero;
      if (y[1] > 0.0L) return ShotOutcome::turns_up;
    }
  }
  // still decaying at r_far: classify by the sign of the growing-mode
  // coefficient of w = r^{(d-1)/2} Q, for which w'' ~ w
  const lreal w = std::pow(r, 0.5L * (d - 1)) * y[0];
  const lreal wp = 0.5L * (d - 1) * std::pow(r, 0.5L * (d - 1) - 1.0L) * y[0] +
                   std::pow(r, 0.5L * (d - 1)) * y[1];
  return (wp + w > 0.0L) ? ShotOutcome::turns_up : ShotOutcome::crosses_zero;
}

/// Dense-output integration sampling (Q, Q') on the uniform mesh. Returns the
/// index of the last sample before the trajectory stops being positive and
/// decreasing (the double-precision shooting horizon).
struct ForwardResult {
  std::vector<double> q, qp;
  std::size_t clean_end;  // samples [0, clean_end] are monotone positive
};

ForwardResult integrate_forward(int d, lreal q0, const std::vector<double>& mesh) {
  RadialOde sys{d, static_cast<lreal>(nonlinearity_power(d))};
  ShootState y = series_start(d, sys.p, q0);
  auto stepper = ode::make_dense_output(1e-16L, 1e-16L,
                                        ode::runge_kutta_dopri5<ShootState, lreal>());
  stepper.initialize(y, kR0, 1e-4L);

  ForwardResult res;
  res.q.assign(mesh.size(), 0.0);
  res.qp.assign(mesh.size(), 0.0);
  res.q[0] = static_cast<double>(q0);
  res.qp[0] = 0.0;

  std::size_t next = 1;
  bool stopped = false;
  long guard = 0;
  while (next < mesh.size() && !stopped && ++guard < 2000000) {
    stepper.do_step(sys);
    while (next < mesh.size() && mesh[next] <= static_cast<double>(stepper.current_time())) {
      ShootState yi;
      stepper.calc_state(static_cast<lreal>(mesh[next]), yi);
      res.q[next] = static_cast<double>(yi[0]);
      res.qp[next] = static_cast<double>(yi[1]);
      ++next;
    }
    const ShootState& cur = stepper.current_state();
    if (cur[0] <= 0.0L || cur[1] > 0.0L) stopped = true;
    if (stepper.current_time() >= static_cast<lreal>(kRFar)) break;
  }

  // trim to the monotone positive prefix
  std::size_t end = 0;
  for (std::size_t i = 1; i < next; ++i) {
    if (res.q[i] > 0.0 && res.q[i] < res.q[i - 1] && res.qp[i] < 0.0)
      end = i;
    else
      break;
  }
  res.clean_end = end;
  return res;
}

struct TailFit {
  double log_a;
  double rate;
};

/// Least-squares fit of log(r^{(d-1)/2} Q / (1 + beta/r)) = log A - rate * r.
TailFit fit_tail(int d, const std::vector<double>& mesh, const std::vector<double>& q,
                 std::size_t i0, std::size_t i1) {
  const double beta = (d - 1.0) * (d - 3.0) / 8.0;
  double sr = 0, srr = 0, sy = 0, sry = 0, n = 0;
  for (std::size_t i = i0; i <= i1; ++i) {
    const double r = mesh[i];
    const double w = std::pow(r, 0.5 * (d - 1)) * q[i] / (1.0 + beta / r);
    if (!(w > 0.0)) continue;
    const double y = std::log(w);
    sr += r;
    srr += r * r;
    sy += y;
    sry += r * y;
    n += 1.0;
  }
  const double det = n * srr - sr * sr;
  const double slope = (n * sry - sr * sy) / det;
  const double icept = (sy * srr - sr * sry) / det;
  return {icept, -slope};
}

/// Backward integration from r = 30 seeded with the tail model.
struct BackwardResult {
  std::vector<double> q, qp;  // on mesh indices [i_match, last]
  std::size_t i_match;
};

BackwardResult integrate_backward(int d, const TailFit& fit, const std::vector<double>& mesh,
                                  std::size_t i_match) {
  RadialOde sys{d, static_cast<lreal>(nonlinearity_power(d))};
  const double beta = (d - 1.0) * (d - 3.0) / 8.0;
  const double rf = mesh.back();
  const double a = std::exp(fit.log_a);
  const double qf =
      a * std::pow(rf, -0.5 * (d - 1)) * std::exp(-fit.rate * rf) * (1.0 + beta / rf);
  const double qpf =
      qf * (-fit.rate - 0.5 * (d - 1) / rf - beta / (rf * rf * (1.0 + beta / rf)));

  auto stepper = ode::make_dense_output(1e-18L, 1e-16L,
                                        ode::runge_kutta_dopri5<ShootState, lreal>());
  ShootState y{static_cast<lreal>(qf), static_cast<lreal>(qpf)};
  stepper.initialize(y, static_cast<lreal>(rf), -1e-3L);

  BackwardResult res;
  res.i_match = i_match;
  res.q.assign(mesh.size() - i_match, 0.0);
  res.qp.assign(mesh.size() - i_match, 0.0);
  res.q.back() = qf;
  res.qp.back() = qpf;

  std::ptrdiff_t next = static_cast<std::ptrdiff_t>(mesh.size()) - 2;
  while (next >= static_cast<std::ptrdiff_t>(i_match)) {
    stepper.do_step(sys);
    while (next >= static_cast<std::ptrdiff_t>(i_match) &&
           mesh[static_cast<std::size_t>(next)] >= static_cast<double>(stepper.current_time())) {
      ShootState yi;
      stepper.calc_state(static_cast<lreal>(mesh[static_cast<std::size_t>(next)]), yi);
      res.q[static_cast<std::size_t>(next) - i_match] = static_cast<double>(yi[0]);
      res.qp[static_cast<std::size_t>(next) - i_match] = static_cast<double>(yi[1]);
      --next;
    }
  }
  return res;
}

}  // namespace

RadialProfile solve_shooting(int d, double tol) {
  if (d < 3 || d > 5) throw std::invalid_argument("solve_shooting: d must be 3, 4 or 5");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_shooting: tol must be positive");

  // bracket the separatrix amplitude
  lreal lo = 0.0L, hi = 0.0L;
  {
    lreal a = 1.5L;
    ShotOutcome oa = classify_shot(d, a);
    if (oa == ShotOutcome::turns_up) {
      lreal b = a;
      for (int i = 0; i < 40 && hi == 0.0L; ++i) {
        b *= 1.5L;
        if (classify_shot(d, b) == ShotOutcome::crosses_zero) {
          lo = b / 1.5L;
          hi = b;
        }
      }
    } else {
      lreal b = a;
      for (int i = 0; i < 40 && hi == 0.0L; ++i) {
        b /= 1.5L;
        if (classify_shot(d, b) == ShotOutcome::turns_up) {
          lo = b;
          hi = b * 1.5L;
        }
      }
    }
    if (hi == 0.0L) throw std::runtime_error("solve_shooting: bisection bracket not found");
  }

  // bisect to the long-double floor regardless of the requested tol: the
  // bracket width bounds the growing-mode contamination of the profile
  const lreal bis_tol = std::min(static_cast<lreal>(tol), 1e-18L);
  for (int it = 0; it < 200 && (hi - lo) > bis_tol * lo; ++it) {
    const lreal mid = 0.5L * (lo + hi);
    if (classify_shot(d, mid) == ShotOutcome::crosses_zero)
      hi = mid;
    else
      lo = mid;
  }
  const lreal q0 = 0.5L * (lo + hi);

  std::vector<double> mesh(kSamples + 1);
  for (std::size_t i = 0; i <= kSamples; ++i)
    mesh[i] = kRFar * static_cast<double>(i) / static_cast<double>(kSamples);

  ForwardResult fwd = integrate_forward(d, q0, mesh);
  const double h = mesh[1] - mesh[0];
  // The growing-mode contamination of the shot is ~ exp(2 (r - r_break))
  // relative, so only radii well below the monotonicity break are trusted.
  if (mesh[fwd.clean_end] < 14.0)
    throw std::runtime_error("solve_shooting: non-monotone profile");
  const std::size_t back = static_cast<std::size_t>(1.0 / h);
  const std::size_t fit_hi = fwd.clean_end - 8 * back;
  const std::size_t fit_lo = fwd.clean_end - 12 * back;
  TailFit fit = fit_tail(d, mesh, fwd.q, fit_lo, fit_hi);

  // backward pass from r = 30; one amplitude correction, then redo
  const std::size_t i_match = fwd.clean_end - 9 * back;
  BackwardResult bwd = integrate_backward(d, fit, mesh, i_match);
  {
    const double scale = fwd.q[i_match] / bwd.q[0];
    fit.log_a += std::log(scale);
    bwd = integrate_backward(d, fit, mesh, i_match);
  }
  const double mismatch = std::abs(bwd.q[0] / fwd.q[i_match] - 1.0);
  const double mismatch_d = std::abs(bwd.qp[0] / fwd.qp[i_match] - 1.0);
  if (mismatch > 1e-6 || mismatch_d > 1e-4)
    throw std::runtime_error("solve_shooting: forward/backward match failed");

  std::vector<double> q(mesh.size()), qp(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (i <= i_match) {
      q[i] = fwd.q[i];
      qp[i] = fwd.qp[i];
    } else {
      q[i] = bwd.q[i - i_match];
      qp[i] = bwd.qp[i - i_match];
    }
  }

  // final tail model fitted on the far end of the assembled samples
  const std::size_t tail_lo = mesh.size() - 1 - static_cast<std::size_t>(3.0 / h);
  TailFit tail_fit = fit_tail(d, mesh, q, tail_lo, mesh.size() - 1);

  if (q.back() > std::max(tol, 1e-9))
    throw std::runtime_error("solve_shooting: profile end value above tolerance");

  return RadialProfile(d, mesh, std::move(q), std::move(qp),
                       RadialTail{std::exp(tail_fit.log_a), tail_fit.rate});
}

// ---------------------------------------------------------------------------
// certification

namespace {

double simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  if (n < 3 || n % 2 == 0) throw std::invalid_argument("simpson: need odd sample count");
  double s = f.front() + f.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += f[i] * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// int_R^inf r^alpha exp(-c r) dr ~ R^alpha exp(-cR)/c * (1 + alpha/(cR)),
/// adequate for the exponentially small tail contributions.
double tail_integral(double alpha, double c, double R) {
  return std::pow(R, alpha) * std::exp(-c * R) / c * (1.0 + alpha / (c * R));
}

}  // namespace

GroundStateCertificate certify(const RadialProfile& profile, double tolerance) {
  const int d = profile.dimension();
  const double p = potential_exponent(d);
  const auto& r = profile.r_samples();
  const auto& q = profile.q_values();
  const auto& qp = profile.qp_values();
  const double h = r[1] - r[0];
  const double S = sphere_area(d);

  std::vector<double> f_mass(r.size()), f_grad(r.size()), f_pot(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double rd = std::pow(r[i], d - 1);
    f_mass[i] = q[i] * q[i] * rd;
    f_grad[i] = qp[i] * qp[i] * rd;
    f_pot[i] = std::pow(q[i], p) * rd;
  }

  const double A = profile.tail().amplitude;
  const double kappa = profile.tail().rate;
  const double R = profile.r_max();
  const double mass_tail = A * A * tail_integral(0.0, 2.0 * kappa, R);
  const double grad_tail = kappa * kappa * A * A * tail_integral(0.0, 2.0 * kappa, R);
  const double pot_tail =
      std::pow(A, p) * tail_integral((d - 1) * (1.0 - 0.5 * p), p * kappa, R);

  GroundStateCertificate c;
  c.d = d;
  c.mass_q = S * (simpson(f_mass, h) + mass_tail);
  c.grad_sq = S * (simpson(f_grad, h) + grad_tail);
  c.potential_norm = S * (simpson(f_pot, h) + pot_tail);
  c.energy_q = 0.5 * c.grad_sq - (d - 1.0) / (2.0 * (d + 1.0)) * c.potential_norm;

  c.pohozaev_res1 = std::abs(c.grad_sq + c.mass_q - c.potential_norm) / c.potential_norm;
  const double rhs2 = d * (d - 1.0) / (d + 1.0) * c.potential_norm;
  c.pohozaev_res2 = std::abs((d - 2.0) * c.grad_sq + d * c.mass_q - rhs2) / rhs2;

  const double c0_formula =
      (d + 1.0) / d * std::pow(c.mass_q * c.grad_sq, -1.0 / (d - 1.0));
  const double c0_direct = c.potential_norm / (std::pow(c.mass_q, 1.0 / (d - 1.0)) *
                                               std::pow(c.grad_sq, static_cast<double>(d) / (d - 1.0)));
  c.c0 = c0_formula;

  c.threshold_me = c.mass_q * c.energy_q;
  c.threshold_l2h1 = std::sqrt(c.mass_q) * std::sqrt(c.grad_sq);

  if (c.pohozaev_res1 > tolerance || c.pohozaev_res2 > tolerance)
    throw std::runtime_error("certify: Pohozaev residuals above tolerance");
  if (std::abs(c0_formula / c0_direct - 1.0) > tolerance)
    throw std::runtime_error("certify: sharp-constant routes disagree");
  if (std::abs(c.energy_q / c.mass_q - 0.5) > tolerance)
    throw std::runtime_error("certify: E(Q) != M(Q)/2");

  return c;
}

// ---------------------------------------------------------------------------
// Petviashvili iteration

ComplexField solve_petviashvili(const GridSpec& grid, double tol, double seed_amplitude,
                                double seed_width) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_petviashvili: tol must be positive");
  if (!(seed_amplitude > 0.0) || !(seed_width > 0.0))
    throw std::invalid_argument("solve_petviashvili: seed must be positive");
  const int d = grid.d;
  const double p = nonlinearity_power(d);
  const double gamma = p / (p - 1.0);
  const auto& tr = transform_for(grid);
  const std::size_t size = grid.size();
  const auto ks = wavenumber_table(grid);
  const auto str = grid.strides();

  auto k2_at = [&](std::size_t idx) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      const double ka = ks[(idx / str[a]) % static_cast<std::size_t>(grid.n)];
      s += ka * ka;
    }
    return s;
  };

  ComplexField w = gaussian_field(grid, seed_amplitude, seed_width);
  std::vector<cplx> nl(size), what(size), nhat(size);

  double damping = 1.0;
  double prev_dev = 0.0;
  int flips = 0;
  bool converged = false;

  for (int it = 0; it < 500; ++it) {
    // N(w) = |w|^{p-1} w
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
      const double a = std::abs(w.values[static_cast<std::size_t>(i)]);
      nl[static_cast<std::size_t>(i)] =
          std::pow(a, p - 1.0) * w.values[static_cast<std::size_t>(i)];
    }
    tr.forward(w.values, what);
    tr.forward(nl, nhat);

    // S = <(1-Lap) w, w> / <N(w), w> evaluated spectrally
    const std::size_t nb = (size + kernels::reduce_block - 1) / kernels::reduce_block;
    std::vector<double> num_p(nb, 0.0), den_p(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * kernels::reduce_block;
      const std::size_t hi = std::min(size, lo + kernels::reduce_block);
      double sn = 0.0, sd = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const double w2 = std::norm(what[i]);
        sn += (1.0 + k2_at(i)) * w2;
        sd += what[i].real() * nhat[i].real() + what[i].imag() * nhat[i].imag();
      }
      num_p[static_cast<std::size_t>(b)] = sn;
      den_p[static_cast<std::size_t>(b)] = sd;
    }
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      num += num_p[b];
      den += den_p[b];
    }
    if (!(den > 0.0) || !std::isfinite(num))
      throw std::runtime_error("solve_petviashvili: iteration diverged");
    const double Sq = num / den;
    const double sfac = std::pow(Sq, gamma);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      nhat[idx] *= sfac / (1.0 + k2_at(idx));
    }
    std::vector<cplx> wnew(size);
    tr.inverse(nhat, wnew);

    // keep iterates real; the imaginary part is FFT round-off
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(size); ++i) {
      const std::size_t idx = static_cast<std::size_t>(i);
      wnew[idx] = cplx{wnew[idx].real(), 0.0};
      if (damping != 1.0)
        wnew[idx] = (1.0 - damping) * w.values[idx] + damping * wnew[idx];
    }

    const double diff = kernels::max_abs_diff(wnew, w.values);
    const double scale = kernels::max_abs(wnew);
    if (!(scale > 1e-12) || !std::isfinite(scale))
      throw std::runtime_error("solve_petviashvili: iteration collapsed to zero");
    w.values = std::move(wnew);

    const double dev = Sq - 1.0;
    if (it > 2 && dev * prev_dev < 0.0 && std::abs(dev) >= std::abs(prev_dev)) {
      if (++flips >= 3) damping = 0.5;  // oscillation fallback
    } else {
      flips = 0;
    }
    prev_dev = dev;

    if (diff < tol * std::max(1.0, scale) && std::abs(dev) < 10.0 * tol) {
      if (converged) {
        // one confirming pass after first convergence
        break;
      }
      converged = true;
    }
  }
  if (!converged) throw std::runtime_error("solve_petviashvili: no convergence in 500 iterations");

  // grid must be large enough that the tail is negligible at the boundary
  double boundary_max = 0.0;
  const auto strides = grid.strides();
  for (int a = 0; a < d; ++a) {
    for (std::size_t idx = 0; idx < size; ++idx) {
      const std::size_t m = (idx / strides[a]) % static_cast<std::size_t>(grid.n);
      if (m == 0) boundary_max = std::max(boundary_max, std::abs(w.values[idx]));
    }
  }
  if (boundary_max > 1e-6 * kernels::max_abs(w.values))
    throw std::runtime_error("solve_petviashvili: grid too small, tail not resolved at boundary");

  return w;
}

ComplexField embed_on_grid(const RadialProfile& profile, const GridSpec& g) {
  if (g.d != profile.dimension())
    throw std::invalid_argument("embed_on_grid: dimension mismatch");
  return sample_field(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return cplx{profile.value(std::sqrt(r2)), 0.0};
  });
}

// ---------------------------------------------------------------------------
// serialization

void write_certificate_json(const std::filesystem::path& path, const GroundStateCertificate& c) {
  json j;
  j["d"] = c.d;
  j["mass_q"] = c.mass_q;
  j["grad_sq"] = c.grad_sq;
  j["potential_norm"] = c.potential_norm;
  j["energy_q"] = c.energy_q;
  j["c0"] = c.c0;
  j["pohozaev_res1"] = c.pohozaev_res1;
  j["pohozaev_res2"] = c.pohozaev_res2;
  j["threshold_me"] = c.threshold_me;
  j["threshold_l2h1"] = c.threshold_l2h1;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_certificate_json: cannot open " + path.string());
  os << j.dump(2) << "\n";
}

GroundStateCertificate read_certificate_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_certificate_json: cannot open " + path.string());
  json j = json::parse(is);
  GroundStateCertificate c;
  c.d = j.at("d").get<int>();
  c.mass_q = j.at("mass_q").get<double>();
  c.grad_sq = j.at("grad_sq").get<double>();
  c.potential_norm = j.at("potential_norm").get<double>();
  c.energy_q = j.at("energy_q").get<double>();
  c.c0 = j.at("c0").get<double>();
  c.pohozaev_res1 = j.at("pohozaev_res1").get<double>();
  c.pohozaev_res2 = j.at("pohozaev_res2").get<double>();
  c.threshold_me = j.at("threshold_me").get<double>();
  c.threshold_l2h1 = j.at("threshold_l2h1").get<double>();
  return c;
}

void write_profile_csv(const std::filesystem::path& path, const RadialProfile& p) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_profile_csv: cannot open " + path.string());
  os << "r,q\n";
  for (std::size_t i = 0; i < p.r_samples().size(); ++i)
    os << fmt_double(p.r_samples()[i]) << "," << fmt_double(p.q_values()[i]) << "\n";
}

}  // namespace nls
