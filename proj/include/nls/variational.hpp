#pragma once

#include <filesystem>
#include <utility>

#include "nls/ground_state.hpp"
#include "nls/trajectory.hpp"

namespace nls {

double mass(const ComplexField& u);

/// E(u) = int 1/2 |grad u|^2 - (d-1)/(2(d+1)) |u|^{2(d+1)/(d-1)}.
double energy(const ComplexField& u);

double kinetic_term(const ComplexField& u);    // 1/2 ||grad u||_2^2
double potential_term(const ComplexField& u);  // (d-1)/(2(d+1)) ||u||_p^p

struct ThresholdReport {
  double me_product = 0.0;
  double me_threshold = 0.0;
  double l2h1_product = 0.0;
  double l2h1_threshold = 0.0;
  bool below_me = false;
  bool below_l2h1 = false;
  double delta = 0.0;        // 1 - me_product/me_threshold
  double delta_prime = 0.0;  // trajectory margin; NaN for a single snapshot
};

/// ||f||_p^p / (C0 ||f||_2^{2/(d-1)} ||grad f||_2^{2d/(d-1)}); equals 1 at Q,
/// below 1 elsewhere.
double gn_quotient(const ComplexField& f, const GroundStateCertificate& cert);

/// Both sides of the boosted Gagliardo-Nirenberg refinement; xi must lie on
/// the reciprocal lattice. lhs <= rhs for every f.
std::pair<double, double> refined_gn_check(const ComplexField& f, std::span<const double> xi,
                                           const GroundStateCertificate& cert);

ThresholdReport threshold_report(const ComplexField& u, const GroundStateCertificate& cert);

/// Sub-threshold persistence monitor: requires the initial snapshot to
/// satisfy both threshold conditions, then checks the product series stays
/// below the ground-state threshold at every recorded time.
std::pair<bool, double> coercivity_monitor(const TrajectoryRecord& traj,
                                           const GroundStateCertificate& cert);

void write_threshold_json(const std::filesystem::path& path, const ThresholdReport& r);

}  // namespace nls
