#pragma once

#include <filesystem>

#include "nls/field.hpp"
#include "nls/spline.hpp"

namespace nls {

/// Nonlinearity power p = 1 + 4/(d-1); the equation is -Q'' - (d-1)/r Q' + Q = Q^p.
inline double nonlinearity_power(int d) { return 1.0 + 4.0 / (d - 1); }

/// Exponent of the potential norm, 2(d+1)/(d-1).
inline double potential_exponent(int d) { return 2.0 * (d + 1) / (d - 1); }

/// Surface area of the unit sphere S^{d-1}.
double sphere_area(int d);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

struct RadialTail {
  double amplitude = 0.0;
  double rate = 0.0;  // Q(r) ~ amplitude * r^{-(d-1)/2} exp(-rate r)
};

/// Radial samples of the ground state with an exponential tail model.
class RadialProfile {
 public:
  RadialProfile(int d, std::vector<double> r, std::vector<double> q, std::vector<double> qp,
                RadialTail tail);

  int dimension() const { return d_; }
  double r_max() const { return r_.back(); }
  const std::vector<double>& r_samples() const { return r_; }
  const std::vector<double>& q_values() const { return q_; }
  const std::vector<double>& qp_values() const { return qp_; }
  const RadialTail& tail() const { return tail_; }

  /// Cubic interpolation inside [0, r_max], tail model beyond.
  double value(double r) const;
  double derivative(double r) const;

 private:
  void validate() const;

  int d_;
  std::vector<double> r_, q_, qp_;
  RadialTail tail_;
  CubicSpline spline_;
};

struct GroundStateCertificate {
  int d = 0;
  double mass_q = 0.0;         // M(Q) = ||Q||_2^2
  double grad_sq = 0.0;        // ||grad Q||_2^2
  double potential_norm = 0.0; // ||Q||_p^p, p = 2(d+1)/(d-1)
  double energy_q = 0.0;       // E(Q)
  double c0 = 0.0;             // sharp Gagliardo-Nirenberg constant
  double pohozaev_res1 = 0.0;
  double pohozaev_res2 = 0.0;
  double threshold_me = 0.0;   // M(Q) E(Q)
  double threshold_l2h1 = 0.0; // ||Q||_2 ||Q||_{H^1 dot}
};

/// Shooting solve of Q'' + (d-1)/r Q' - Q + Q^p = 0, Q'(0) = 0: bisection on
/// Q(0) between "crosses zero" and "turns upward" outcomes, high-order
/// adaptive integration, and a backward pass from the far field so the
/// returned samples reach r = 30 cleanly.
RadialProfile solve_shooting(int d, double tol);

/// Petviashvili fixed-point iteration on the grid; returns a real positive
/// field solving the same elliptic equation. Converges to the same fixed
/// point from any positive gaussian seed.
ComplexField solve_petviashvili(const GridSpec& grid, double tol, double seed_amplitude = 3.0,
                                double seed_width = 0.8);

/// Norms, Pohozaev residuals, sharp constant and threshold products, all by
/// radial quadrature plus the tail model's closed-form contribution. Throws
/// if the residuals exceed the certification tolerance.
GroundStateCertificate certify(const RadialProfile& profile, double tolerance = 1e-6);

/// Sample the profile at the grid's (centered) radii.
ComplexField embed_on_grid(const RadialProfile& profile, const GridSpec& g);

void write_certificate_json(const std::filesystem::path& path, const GroundStateCertificate& c);
GroundStateCertificate read_certificate_json(const std::filesystem::path& path);
void write_profile_csv(const std::filesystem::path& path, const RadialProfile& p);

}  // namespace nls
