#include "nls/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "nls/spectral.hpp"
#include "nls/variational.hpp"

namespace nls {

CriterionScan criterion_scan(const TrajectoryRecord& traj, double a, double T0, double eps) {
  if (!(T0 > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("criterion_scan: T0 and eps must be positive");
  if (traj.snapshot_times.size() < 3)
    throw std::invalid_argument("criterion_scan: too few checkpoints");

  CriterionScan scan;
  scan.a = a;
  scan.t0_window = T0;
  scan.eps = eps;
  scan.window_length = std::cbrt(T0);

  const double lo_needed = a - scan.window_length;
  const double hi_needed = a + T0;
  if (traj.snapshot_times.front() > lo_needed + 1e-9 ||
      traj.snapshot_times.back() < hi_needed - 1e-9)
    throw std::invalid_argument("criterion_scan: trajectory does not cover [a - T0^{1/3}, a + T0]");

  // spatial norms once per snapshot
  ComplexField first = traj.load_snapshot(0);
  const double q = 2.0 * (first.grid.d + 2) / (first.grid.d - 1);
  std::vector<double> g(traj.snapshot_times.size());
  for (std::size_t i = 0; i < traj.snapshot_times.size(); ++i) {
    ComplexField u = (i == 0) ? std::move(first) : traj.load_snapshot(i);
    g[i] = lp_norm(u, q);
  }

  scan.best_norm = inf;
  for (std::size_t i = 0; i < traj.snapshot_times.size(); ++i) {
    const double t0 = traj.snapshot_times[i];
    if (t0 <= a || t0 >= a + T0) continue;
    if (t0 - scan.window_length < traj.snapshot_times.front() - 1e-9) continue;
    const double norm = spacetime_norm_from_values(traj.snapshot_times, g, q,
                                                   t0 - scan.window_length, t0);
    scan.windows.emplace_back(t0, norm);
    if (norm < scan.best_norm) {
      scan.best_norm = norm;
      scan.best_t0 = t0;
    }
  }
  if (scan.windows.empty())
    throw std::invalid_argument("criterion_scan: no admissible t0 inside (a, a + T0)");
  scan.satisfied = scan.best_norm <= eps;
  return scan;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

VerdictReport verdict(const TrajectoryRecord& traj, const GroundStateCertificate& cert,
                      std::span<const CriterionScan> scans, std::span<const double> cauchy_tail) {
  VerdictReport rep;

  if (traj.status == RunStatus::blowup_suspected) {
    rep.verdict = "terminated-growth";
    return rep;
  }

  const double me0 = traj.mass_series.front() * traj.energy_series.front();
  rep.below_me = me0 < cert.threshold_me;
  rep.below_l2h1 = traj.l2h1_series.front() < cert.threshold_l2h1;
  rep.delta = 1.0 - me0 / cert.threshold_me;

  if (rep.below_me && rep.below_l2h1) {
    const auto [holds, dp] = coercivity_monitor(traj, cert);
    rep.coercivity_holds = holds;
    rep.delta_prime = dp;
  } else {
    rep.coercivity_holds = false;
    rep.delta_prime = std::numeric_limits<double>::quiet_NaN();
  }

  bool any_satisfied = false;
  if (!scans.empty()) {
    for (const auto& s : scans) any_satisfied = any_satisfied || s.satisfied;
    rep.criterion_late_satisfied = scans.back().satisfied;
    rep.scans.assign(scans.begin(), scans.end());
  }

  if (!cauchy_tail.empty()) {
    rep.cauchy_first = cauchy_tail.front();
    rep.cauchy_last = cauchy_tail.back();
    const std::size_t q = std::max<std::size_t>(1, cauchy_tail.size() / 4);
    std::vector<double> head(cauchy_tail.begin(), cauchy_tail.begin() + q);
    std::vector<double> tail(cauchy_tail.end() - q, cauchy_tail.end());
    rep.cauchy_decreasing = median_of(tail) < 0.5 * median_of(head);
  }

  if (rep.below_me && rep.below_l2h1 && rep.coercivity_holds && rep.criterion_late_satisfied &&
      rep.cauchy_decreasing) {
    rep.verdict = "scattering-consistent";
  } else if (!any_satisfied && !rep.cauchy_decreasing && !cauchy_tail.empty()) {
    rep.verdict = "soliton-like";
  } else {
    rep.verdict = "inconclusive";
  }
  return rep;
}

void write_verdict_json(const std::filesystem::path& path, const VerdictReport& v) {
  nlohmann::json j;
  j["verdict"] = v.verdict;
  j["below_me"] = v.below_me;
  j["below_l2h1"] = v.below_l2h1;
  j["coercivity_holds"] = v.coercivity_holds;
  j["delta"] = v.delta;
  if (std::isnan(v.delta_prime))
    j["delta_prime"] = nullptr;
  else
    j["delta_prime"] = v.delta_prime;
  j["criterion_late_satisfied"] = v.criterion_late_satisfied;
  j["cauchy_decreasing"] = v.cauchy_decreasing;
  j["cauchy_first"] = v.cauchy_first;
  j["cauchy_last"] = v.cauchy_last;
  nlohmann::json scans = nlohmann::json::array();
  for (const auto& s : v.scans) {
    nlohmann::json js;
    js["a"] = s.a;
    js["t0_window"] = s.t0_window;
    js["eps"] = s.eps;
    js["satisfied"] = s.satisfied;
    js["best_t0"] = s.best_t0;
    js["best_norm"] = s.best_norm;
    nlohmann::json wins = nlohmann::json::array();
    for (const auto& [t0, norm] : s.windows) wins.push_back({t0, norm});
    js["windows"] = wins;
    scans.push_back(js);
  }
  j["scans"] = scans;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_verdict_json: cannot open " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace nls
