#pragma once

#include <string>

#include "nls/ground_state.hpp"
#include "nls/trajectory.hpp"

namespace nls {

/// Sliding-window smallness scan for the scattering criterion: windows
/// [t0 - T0^{1/3}, t0] of the L_{t,x}^{2(d+2)/(d-1)} norm, t0 inside
/// (a, a + T0).
struct CriterionScan {
  double a = 0.0;
  double t0_window = 0.0;        // T0
  double eps = 0.0;
  double window_length = 0.0;    // T0^{1/3}
  std::vector<std::pair<double, double>> windows;  // (t0, window norm)
  bool satisfied = false;
  double best_t0 = 0.0;
  double best_norm = 0.0;
};

CriterionScan criterion_scan(const TrajectoryRecord& traj, double a, double T0, double eps);

struct VerdictReport {
  std::string verdict;  // scattering-consistent | soliton-like | terminated-growth | inconclusive
  bool below_me = false;
  bool below_l2h1 = false;
  bool coercivity_holds = false;
  double delta = 0.0;
  double delta_prime = 0.0;
  bool criterion_late_satisfied = false;
  bool cauchy_decreasing = false;
  double cauchy_first = 0.0;
  double cauchy_last = 0.0;
  std::vector<CriterionScan> scans;
};

/// Assemble the per-run verdict from threshold flags, the coercivity
/// monitor, criterion scans over successive a, and the Cauchy tail of
/// e^{-it Lap} u(t).
VerdictReport verdict(const TrajectoryRecord& traj, const GroundStateCertificate& cert,
                      std::span<const CriterionScan> scans, std::span<const double> cauchy_tail);

void write_verdict_json(const std::filesystem::path& path, const VerdictReport& v);

}  // namespace nls
