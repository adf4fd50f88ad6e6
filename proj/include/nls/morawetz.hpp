#pragma once

#include <array>
#include <memory>
#include <optional>

#include "nls/ground_state.hpp"
#include "nls/spline.hpp"
#include "nls/trajectory.hpp"

namespace nls {

/// Radial weight family for the interaction Morawetz functional. The unit
/// profiles (argument |x|/R) are tabulated once per (d, epsilon); R only
/// rescales the argument:
///   chi: quintic-smoothstep cutoff, 1 on [0, 1-eps], 0 beyond 1;
///   phi: (1/omega_d) chi^2 * chi^2 correlation, supported in [0, 2];
///   psi(rho) = (1/rho) int_0^rho phi;
///   phi1: correlation of chi^{2(d+1)/(d-1)} with chi^2.
class MorawetzWeightSet {
 public:
  MorawetzWeightSet(int d, double epsilon, double R);

  int dimension() const { return d_; }
  double epsilon() const { return eps_; }
  double R() const { return r_window_; }
  double omega_d() const { return omega_; }
  double c_psi() const { return c_psi_; }  // |psi(x)| <= min(1, c_psi R/|x|)

  double chi(double rho) const;        // unit argument
  double chi_prime(double rho) const;
  double chi_second(double rho) const;
  double chi_window(double r) const { return chi(r / r_window_); }  // physical radius

  // physical-radius profiles
  double phi(double r) const;
  double psi(double r) const;
  double phi1(double r) const;
  double phi_deriv(double r) const;
  double psi_deriv(double r) const;

  /// max over the tabulation of |psi' - (phi - psi)/rho| (unit mesh, scaled).
  double gradient_identity_residual() const { return grad_residual_; }
  /// phi failed the (unproven) radial monotonicity check for this epsilon.
  bool phi_monotonicity_warning() const { return phi_warning_; }

  const std::vector<double>& unit_mesh() const { return mesh_; }
  const std::vector<double>& unit_phi() const { return phi_tab_; }
  const std::vector<double>& unit_psi() const { return psi_tab_; }
  const std::vector<double>& unit_phi1() const { return phi1_tab_; }

  /// Rebuild from previously tabulated unit profiles (cache loads).
  static MorawetzWeightSet from_tables(int d, double epsilon, double R,
                                       std::vector<double> mesh, std::vector<double> phi,
                                       std::vector<double> psi, std::vector<double> phi1);

 private:
  MorawetzWeightSet() = default;
  void finish_build();

  int d_ = 3;
  double eps_ = 0.1, r_window_ = 1.0, omega_ = 0.0, c_psi_ = 0.0, grad_residual_ = 0.0;
  bool phi_warning_ = false;
  std::vector<double> mesh_, phi_tab_, psi_tab_, phi1_tab_;
  CubicSpline phi_s_, psi_s_, phi1_s_;
};

MorawetzWeightSet build_weights(double epsilon, double R, int d);

/// Binary weights cache keyed by (d, epsilon, R, n, l).
void save_weights_cache(const std::filesystem::path& path, const MorawetzWeightSet& w,
                        const GridSpec& grid);
std::optional<MorawetzWeightSet> load_weights_cache(const std::filesystem::path& path,
                                                    double epsilon, double R, int d,
                                                    const GridSpec& grid);

/// Windowed Galilean velocity: minus windowed momentum over windowed mass,
/// zero when the denominator is under the mass floor.
std::vector<double> windowed_xi(const ComplexField& u, const MorawetzWeightSet& w,
                                std::span<const double> center);

/// Interaction Morawetz quantity M_R via spectral convolution.
double interaction_m(const ComplexField& u, const MorawetzWeightSet& w);

/// Direct O(n^{2d}) double-sum evaluation (minimum-image displacement); the
/// oracle for the spectral-convolution path at small n.
double interaction_m_direct(const ComplexField& u, const MorawetzWeightSet& w);

struct MorawetzLedger {
  double t = 0.0;
  double R = 0.0;
  double m_r = 0.0;
  double m_r_bound = 0.0;      // pinned-constant reference c * R * M(u) E(u)
  double mor10 = 0.0;
  double mor_rem = 0.0;        // mor11 + mor12
  double mor13 = 0.0;
  double mor5 = 0.0;
  double mor6 = 0.0;
  double mor7 = 0.0;
  double mor8 = 0.0;
  double fd_derivative = 0.0;
  double positivity_868 = 0.0; // mor8 + mor6
  double coerced_75 = 0.0;     // lattice-sum xi-boosted form of mor7 + mor5
  double identity_residual = 0.0;  // |fd - ledger sum| / scale
  bool flagged = false;        // identity residual above tolerance
};

/// Evaluate the full derivative decomposition at checkpoint t_index, with a
/// centered finite difference from the neighbouring checkpoints.
MorawetzLedger morawetz_ledger(const TrajectoryRecord& traj, const MorawetzWeightSet& w,
                               std::size_t t_index, double fd_tolerance = 1e-2);

/// Galilean frame on the s-lattice (R/4)Z^d (theta = 0, snapped to the grid).
struct GalileanFrame {
  double R = 0.0;
  std::vector<std::array<double, 5>> lattice;    // centers, d components used
  std::vector<std::array<double, 5>> xi_values;
  std::vector<double> denominators;              // windowed masses
};

GalileanFrame build_galilean_frame(const ComplexField& u, const MorawetzWeightSet& w);

struct BulkResult {
  double bulk = 0.0;  // time/lattice/log-R averaged coerced bulk
  double nu = 0.0;    // R0 e^J/(T0 J) + epsilon
  double averaged_dmdt = 0.0;   // fundamental-theorem bound term
  double averaged_err1 = 0.0;   // |mor11| + |mor12| averages
  double averaged_err2 = 0.0;   // gradient-kernel error term average
};

BulkResult bulk_average(const TrajectoryRecord& traj, double epsilon, double a, double T0,
                        double R0, int J, int K_R);

struct WindowedCoercivity {
  double l2 = 0.0;            // ||chi u||_2
  double grad_l2 = 0.0;       // ||grad(chi u)||_2
  double product = 0.0;
  double margin = 0.0;        // vs (1-2 delta)^{(d-1)/2} ||Q||_2 ||grad Q||_2
  double delta = 0.0;
  double ibp_residual = 0.0;  // |I - (int chi^2|grad u|^2 - chi Lap(chi)|u|^2)| / I
  double potential_p = 0.0;   // (d/(d+1)) ||chi u||_p^p
  double boosted_kinetic = 0.0;  // int chi^2 |grad u^xi|^2 with the windowed xi
};

WindowedCoercivity windowed_coercivity(const ComplexField& u, const MorawetzWeightSet& w,
                                       const GroundStateCertificate& cert,
                                       std::span<const double> center);

/// One row per (t, R): the morawetz.csv schema.
struct MorawetzRow {
  double t, R, m_r, fd_dmdt, mor10, mor_rem, mor13, mor5, mor6, mor7, mor8, pos868, coerced75,
      bulk_contrib;
};

/// Batch evaluation over checkpoints in [a, a+T0] and K_R log-spaced radii;
/// shares kernel spectra across checkpoints.
std::vector<MorawetzRow> morawetz_scan(const TrajectoryRecord& traj, double epsilon, double a,
                                       double T0, double R0, int J, int K_R);

void write_morawetz_csv(const std::filesystem::path& path, std::span<const MorawetzRow> rows);

/// Reference constant for the |M_R| <= c R M E bound; frozen on the first
/// corpus run (see tests/pinned_constants).
double mr_bound_reference(double R, double mass_u, double energy_u);

}  // namespace nls
