#pragma once

#include <limits>
#include <span>
#include <vector>

#include "nls/field.hpp"

namespace nls {

inline constexpr double inf = std::numeric_limits<double>::infinity();

/// Space-time norm exponents: L_t^q L_x^r of |grad|^s f.
struct NormSpec {
  double q = inf;
  double r = 2.0;
  double s = 0.0;

  void validate() const {
    auto ok = [](double e) { return e == inf || e >= 1.0; };
    if (!ok(q) || !ok(r)) throw std::invalid_argument("NormSpec: exponents must be >= 1 or inf");
    if (!(s == 0.0 || s == 0.5 || s == 1.0))
      throw std::invalid_argument("NormSpec: s must be 0, 1/2 or 1");
  }
};

/// Spectral derivative along each axis; exact for band-limited fields
/// (the Nyquist mode is dropped from the odd multiplier).
std::vector<ComplexField> gradient(const ComplexField& f);

/// |k|^s Fourier multiplier, s in [0, 2]; the zero mode maps to zero.
ComplexField fractional_derivative(const ComplexField& f, double s);

/// Riemann-sum L^p norm; p = inf gives max |f|.
double lp_norm(const ComplexField& f, double p);

/// exp(it Laplacian): frequency-space multiplication by exp(-i|k|^2 t).
ComplexField free_propagator(const ComplexField& f, double t);

/// Homogeneous Sobolev seminorm via Parseval: || |k|^s f^ ||_2 scaled to
/// match the grid quadrature.
double sobolev_seminorm(const ComplexField& f, double s);

double h1_norm(const ComplexField& f);

/// 2/3-rule dealiasing: zero all modes with any axis frequency above n/3.
void dealias(ComplexField& f);

/// Sum of |f^|^2 over modes / n^d, for Parseval cross checks.
double spectral_l2sq(const ComplexField& f);

struct TimedField {
  double t;
  const ComplexField* field;
};

/// Trapezoidal L_t^q of the spatial norms over [t0, t1] (sup for q = inf).
/// Endpoints inside a sample interval use linear interpolation of the
/// integrand.
double spacetime_norm(std::span<const TimedField> series, const NormSpec& spec, double t0,
                      double t1);

/// Same quadrature on precomputed spatial norms g(t_i) = ||f(t_i)||.
double spacetime_norm_from_values(std::span<const double> times, std::span<const double> g,
                                  double q, double t0, double t1);

}  // namespace nls
