#include "nls/variational.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "nls/evolution.hpp"
#include "nls/kernels.hpp"
#include "nls/spectral.hpp"

namespace nls {

double mass(const ComplexField& u) {
  return kernels::sum_abs2(u.values) * u.grid.cell_volume();
}

double kinetic_term(const ComplexField& u) {
  const double h1 = sobolev_seminorm(u, 1.0);
  return 0.5 * h1 * h1;
}

double potential_term(const ComplexField& u) {
  const int d = u.grid.d;
  const double p = potential_exponent(d);
  return (d - 1.0) / (2.0 * (d + 1.0)) * kernels::sum_abs_pow(u.values, p) *
         u.grid.cell_volume();
}

double energy(const ComplexField& u) { return kinetic_term(u) - potential_term(u); }

double gn_quotient(const ComplexField& f, const GroundStateCertificate& cert) {
  const int d = f.grid.d;
  if (d != cert.d) throw std::invalid_argument("gn_quotient: dimension mismatch");
  const double p = potential_exponent(d);
  const double l2 = lp_norm(f, 2.0);
  if (!(l2 > 0.0)) throw std::invalid_argument("gn_quotient: zero field");
  const double pot = kernels::sum_abs_pow(f.values, p) * f.grid.cell_volume();
  const double grad = sobolev_seminorm(f, 1.0);
  return pot / (cert.c0 * std::pow(l2, 2.0 / (d - 1)) * std::pow(grad, 2.0 * d / (d - 1)));
}

std::pair<double, double> refined_gn_check(const ComplexField& f, std::span<const double> xi,
                                           const GroundStateCertificate& cert) {
  const int d = f.grid.d;
  if (d != cert.d) throw std::invalid_argument("refined_gn_check: dimension mismatch");
  const double p = potential_exponent(d);
  const double lhs = kernels::sum_abs_pow(f.values, p) * f.grid.cell_volume();

  ComplexField boosted = galilean_boost(f, xi);  // validates the lattice constraint
  const double grad_boosted = sobolev_seminorm(boosted, 1.0);
  const double l2 = lp_norm(f, 2.0);
  const double grad = sobolev_seminorm(f, 1.0);
  const double ratio = l2 * grad / cert.threshold_l2h1;
  const double rhs = (d + 1.0) / d * std::pow(ratio, 2.0 / (d - 1)) * grad_boosted * grad_boosted;
  return {lhs, rhs};
}

ThresholdReport threshold_report(const ComplexField& u, const GroundStateCertificate& cert) {
  if (u.grid.d != cert.d) throw std::invalid_argument("threshold_report: dimension mismatch");
  ThresholdReport r;
  const double m = mass(u);
  const double e = energy(u);
  r.me_product = m * e;
  r.me_threshold = cert.threshold_me;
  r.l2h1_product = lp_norm(u, 2.0) * sobolev_seminorm(u, 1.0);
  r.l2h1_threshold = cert.threshold_l2h1;
  r.below_me = r.me_product < r.me_threshold;
  r.below_l2h1 = r.l2h1_product < r.l2h1_threshold;
  r.delta = 1.0 - r.me_product / r.me_threshold;
  r.delta_prime = std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::pair<bool, double> coercivity_monitor(const TrajectoryRecord& traj,
                                           const GroundStateCertificate& cert) {
  traj.check_consistent();
  if (traj.times.empty()) throw std::invalid_argument("coercivity_monitor: empty trajectory");
  const double me0 = traj.mass_series.front() * traj.energy_series.front();
  const double l2h10 = traj.l2h1_series.front();
  if (!(me0 < cert.threshold_me) || !(l2h10 < cert.threshold_l2h1))
    throw std::invalid_argument(
        "coercivity_monitor: initial data does not satisfy the sub-threshold conditions");
  double worst = 0.0;
  for (double v : traj.l2h1_series) worst = std::max(worst, v);
  const bool holds = worst < cert.threshold_l2h1;
  return {holds, 1.0 - worst / cert.threshold_l2h1};
}

void write_threshold_json(const std::filesystem::path& path, const ThresholdReport& r) {
  nlohmann::json j;
  j["me_product"] = r.me_product;
  j["me_threshold"] = r.me_threshold;
  j["l2h1_product"] = r.l2h1_product;
  j["l2h1_threshold"] = r.l2h1_threshold;
  j["below_me"] = r.below_me;
  j["below_l2h1"] = r.below_l2h1;
  j["delta"] = r.delta;
  if (std::isnan(r.delta_prime))
    j["delta_prime"] = nullptr;
  else
    j["delta_prime"] = r.delta_prime;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_threshold_json: cannot open " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace nls
