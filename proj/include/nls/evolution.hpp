#pragma once

#include <utility>

#include "nls/trajectory.hpp"

namespace nls {

/// Raised by strang_step when dt * max|u|^{4/(d-1)} >= max_phase; the caller
/// is expected to halve dt.
struct PhaseCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One Strang splitting step: half free flight, full nonlinear phase
/// u <- exp(i dt |u|^{4/(d-1)}) u, optional 2/3 dealiasing, half free flight.
ComplexField strang_step(const ComplexField& u, double dt, bool apply_dealias = true,
                         double max_phase = 0.5);

/// Continuation knobs used when resuming into an existing trajectory
/// directory: snapshot numbering continues and the seam state is not
/// re-recorded.
struct ResumeOptions {
  std::size_t snapshot_index_offset = 0;
  bool record_initial = true;
};

/// Time-step from u0 (at time t_start) to cfg.t_end, recording per-step
/// diagnostics and snapshots every checkpoint_stride steps. Automatic dt
/// halving under the phase cap; blow-up and truncation guards.
TrajectoryRecord evolve(const ComplexField& u0, const EvolveConfig& cfg, double t_start = 0.0,
                        const ResumeOptions& resume = {});

/// Pointwise multiplication by exp(i x.v); v must be on the reciprocal
/// lattice so the multiplier is grid periodic.
ComplexField galilean_boost(const ComplexField& u, std::span<const double> v);

/// Exact spectral translation u(x) -> u(x - shift).
ComplexField spectral_translate(const ComplexField& u, std::span<const double> shift);

/// Rescale u to u_lambda(x) = lambda^{(d-1)/2} u(lambda x) with
/// lambda = sqrt(M/E), realized on a rescaled grid so that afterwards
/// M = E = sqrt(M(u) E(u)). Returns the field and lambda.
std::pair<ComplexField, double> rescale_mass_energy(const ComplexField& u0);

struct AsymptoticState {
  ComplexField last_w;               // e^{-it Lap} u(t) at the final checkpoint
  std::vector<double> tail_times;    // time of the later checkpoint in each pair
  std::vector<double> cauchy_tail;   // ||w(t_i) - w(t_{i-1})||_{H^1}
};

/// Undo the free flow at every checkpoint; a decreasing Cauchy tail is the
/// numerical scattering signature.
AsymptoticState asymptotic_state(const TrajectoryRecord& traj);

}  // namespace nls
