#include "nls/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>

#include <json.hpp>

#include "nls/evolution.hpp"
#include "nls/ground_state.hpp"
#include "nls/kernels.hpp"
#include "nls/morawetz.hpp"
#include "nls/rng.hpp"
#include "nls/scattering.hpp"
#include "nls/spectral.hpp"
#include "nls/textio.hpp"
#include "nls/variational.hpp"

namespace nls {

using json = nlohmann::json;

namespace {

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
  }
}

const RadialProfile& shared_profile(int d) {
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<RadialProfile>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(d);
  if (it == cache.end())
    it = cache.emplace(d, std::make_unique<RadialProfile>(solve_shooting(d, 1e-10))).first;
  return *it->second;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: parse failure in " + path.string() + ": " + e.what());
  }

  require_keys(j, {"schema_version", "dimension", "grid", "initial_data", "evolve", "morawetz",
                   "criterion", "outputs", "seed", "normalize_mass_energy"},
               "top level");
  ExperimentConfig cfg;
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != 1)
    throw std::invalid_argument("config: unsupported schema_version");
  cfg.dimension = j.value("dimension", 3);

  if (j.contains("grid")) {
    const auto& jg = j.at("grid");
    require_keys(jg, {"n", "l"}, "grid");
    cfg.grid = GridSpec(cfg.dimension, jg.at("n").get<int>(), jg.at("l").get<double>());
  } else {
    cfg.grid = GridSpec(cfg.dimension, cfg.grid.n, cfg.grid.l);
  }

  if (j.contains("initial_data")) {
    const auto& ji = j.at("initial_data");
    require_keys(ji,
                 {"family", "amplitude", "width", "scale", "width_scale", "noise_seed",
                  "noise_amplitude", "boost", "path"},
                 "initial_data");
    auto& init = cfg.initial_data;
    init.family = ji.at("family").get<std::string>();
    init.amplitude = ji.value("amplitude", 1.0);
    init.width = ji.value("width", 1.0);
    init.scale = ji.value("scale", 1.0);
    init.width_scale = ji.value("width_scale", 1.0);
    init.noise_seed = ji.value("noise_seed", std::uint64_t{0});
    init.noise_amplitude = ji.value("noise_amplitude", 0.0);
    if (ji.contains("boost")) init.boost = ji.at("boost").get<std::vector<double>>();
    init.path = ji.value("path", std::string{});
    static const std::set<std::string> families = {"gaussian", "soliton", "soliton_perturbed",
                                                   "file"};
    if (!families.count(init.family))
      throw std::invalid_argument("config: unknown initial_data.family \"" + init.family + "\"");
  } else {
    throw std::invalid_argument("config: initial_data section is required");
  }

  cfg.evolve.grid = cfg.grid;
  if (j.contains("evolve")) {
    const auto& je = j.at("evolve");
    require_keys(je,
                 {"dt", "t_end", "checkpoint_stride", "dealias", "max_phase", "blowup_factor",
                  "max_halvings", "truncation_limit", "truncation_policy", "absorbing_layer"},
                 "evolve");
    cfg.evolve.dt = je.value("dt", cfg.evolve.dt);
    cfg.evolve.t_end = je.value("t_end", cfg.evolve.t_end);
    cfg.evolve.checkpoint_stride = je.value("checkpoint_stride", cfg.evolve.checkpoint_stride);
    cfg.evolve.dealias = je.value("dealias", cfg.evolve.dealias);
    cfg.evolve.max_phase = je.value("max_phase", cfg.evolve.max_phase);
    cfg.evolve.blowup_factor = je.value("blowup_factor", cfg.evolve.blowup_factor);
    cfg.evolve.max_halvings = je.value("max_halvings", cfg.evolve.max_halvings);
    cfg.evolve.truncation_limit = je.value("truncation_limit", cfg.evolve.truncation_limit);
    const std::string pol = je.value("truncation_policy", std::string{"flag"});
    if (pol == "flag")
      cfg.evolve.truncation_policy = TruncationPolicy::flag;
    else if (pol == "abort")
      cfg.evolve.truncation_policy = TruncationPolicy::abort;
    else
      throw std::invalid_argument("config: truncation_policy must be flag or abort");
    cfg.evolve.absorbing_layer = je.value("absorbing_layer", false);
  }

  if (j.contains("morawetz")) {
    const auto& jm = j.at("morawetz");
    require_keys(jm, {"epsilon", "r0", "j", "k_r", "a", "t0"}, "morawetz");
    cfg.morawetz.epsilon = jm.value("epsilon", 0.1);
    cfg.morawetz.r0 = jm.value("r0", 1.0);
    cfg.morawetz.j = jm.value("j", 10);
    cfg.morawetz.k_r = jm.value("k_r", 16);
    cfg.morawetz.a = jm.value("a", 0.0);
    cfg.morawetz.t0 = jm.value("t0", 20.0);
  }

  if (j.contains("criterion")) {
    const auto& jc = j.at("criterion");
    require_keys(jc, {"eps_sc", "t0_sc"}, "criterion");
    cfg.criterion.eps_sc = jc.value("eps_sc", 0.1);
    cfg.criterion.t0_sc = jc.value("t0_sc", 20.0);
  }

  if (j.contains("outputs")) cfg.outputs = j.at("outputs").get<std::string>();
  cfg.seed = j.value("seed", std::uint64_t{1});
  cfg.normalize_mass_energy = j.value("normalize_mass_energy", false);
  cfg.evolve.out_dir = cfg.outputs;
  return cfg;
}

void write_experiment_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["dimension"] = cfg.dimension;
  j["grid"] = {{"n", cfg.grid.n}, {"l", cfg.grid.l}};
  json ji;
  ji["family"] = cfg.initial_data.family;
  ji["amplitude"] = cfg.initial_data.amplitude;
  ji["width"] = cfg.initial_data.width;
  ji["scale"] = cfg.initial_data.scale;
  ji["width_scale"] = cfg.initial_data.width_scale;
  ji["noise_seed"] = cfg.initial_data.noise_seed;
  ji["noise_amplitude"] = cfg.initial_data.noise_amplitude;
  ji["boost"] = cfg.initial_data.boost.empty()
                    ? std::vector<double>(static_cast<std::size_t>(cfg.dimension), 0.0)
                    : cfg.initial_data.boost;
  ji["path"] = cfg.initial_data.path;
  j["initial_data"] = ji;
  json je;
  je["dt"] = cfg.evolve.dt;
  je["t_end"] = cfg.evolve.t_end;
  je["checkpoint_stride"] = cfg.evolve.checkpoint_stride;
  je["dealias"] = cfg.evolve.dealias;
  je["max_phase"] = cfg.evolve.max_phase;
  je["blowup_factor"] = cfg.evolve.blowup_factor;
  je["max_halvings"] = cfg.evolve.max_halvings;
  je["truncation_limit"] = cfg.evolve.truncation_limit;
  je["truncation_policy"] =
      cfg.evolve.truncation_policy == TruncationPolicy::flag ? "flag" : "abort";
  je["absorbing_layer"] = cfg.evolve.absorbing_layer;
  j["evolve"] = je;
  j["morawetz"] = {{"epsilon", cfg.morawetz.epsilon}, {"r0", cfg.morawetz.r0},
                   {"j", cfg.morawetz.j},             {"k_r", cfg.morawetz.k_r},
                   {"a", cfg.morawetz.a},             {"t0", cfg.morawetz.t0}};
  j["criterion"] = {{"eps_sc", cfg.criterion.eps_sc}, {"t0_sc", cfg.criterion.t0_sc}};
  j["outputs"] = cfg.outputs.string();
  j["seed"] = cfg.seed;
  j["normalize_mass_energy"] = cfg.normalize_mass_energy;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("write_experiment_config: cannot open " + path.string());
  os << j.dump(2) << "\n";
}

ComplexField make_initial_data(const ExperimentConfig& cfg) {
  const auto& init = cfg.initial_data;
  ComplexField u0;
  if (init.family == "gaussian") {
    u0 = gaussian_field(cfg.grid, init.amplitude, init.width);
  } else if (init.family == "soliton" || init.family == "soliton_perturbed") {
    const RadialProfile& q = shared_profile(cfg.grid.d);
    const double lam = init.width_scale;
    const double scale = init.scale * std::pow(lam, 0.5 * (cfg.grid.d - 1));
    u0 = sample_field(cfg.grid, [&](std::span<const double> x) {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      return cplx{scale * q.value(lam * std::sqrt(r2)), 0.0};
    });
    if (init.family == "soliton_perturbed" && init.noise_amplitude != 0.0) {
      SeededRng rng(init.noise_seed != 0 ? init.noise_seed : cfg.seed);
      ComplexField noise = random_smooth_field(cfg.grid, rng, 2.0);
      kernels::add_scaled(std::span<cplx>(u0.values), std::span<const cplx>(noise.values),
                          cplx{init.noise_amplitude, 0.0});
    }
  } else if (init.family == "file") {
    u0 = read_nlsf(init.path);
    if (!(u0.grid == cfg.grid))
      throw std::invalid_argument("initial_data: snapshot grid differs from configured grid");
  } else {
    throw std::invalid_argument("initial_data: unknown family");
  }
  if (!init.boost.empty()) {
    bool nonzero = false;
    for (double v : init.boost) nonzero = nonzero || v != 0.0;
    if (nonzero) u0 = galilean_boost(u0, init.boost);
  }
  u0.time_tag = 0.0;
  return u0;
}

// ---------------------------------------------------------------------------
// commands

int cmd_ground_state(int d, double tol, const std::filesystem::path& out_dir) {
  if (d < 3 || d > 5) {
    std::cerr << "ground-state: unsupported dimension d = " << d << " (supported: 3, 4, 5)\n";
    return 2;
  }
  std::filesystem::create_directories(out_dir);
  RadialProfile profile = solve_shooting(d, tol);
  GroundStateCertificate cert = certify(profile);
  write_certificate_json(out_dir / "certificate.json", cert);
  write_profile_csv(out_dir / "profile.csv", profile);

  json j;
  j["d"] = d;
  j["tol"] = tol;
  j["q0"] = profile.q_values().front();
  j["tail_amplitude"] = profile.tail().amplitude;
  j["tail_rate"] = profile.tail().rate;
  if (d == 3) {
    // cross-method check on a grid that resolves Q
    GridSpec g(3, 128, 12.0);
    ComplexField w = solve_petviashvili(g, 1e-9);
    ComplexField qe = embed_on_grid(profile, g);
    const double gap =
        kernels::max_abs_diff(w.values, qe.values) / kernels::max_abs(qe.values);
    j["petviashvili_linf_gap"] = gap;
    j["petviashvili_grid"] = {{"n", g.n}, {"l", g.l}};
  } else {
    // the d = 4, 5 cores are too narrow for an affordable grid solve
    j["petviashvili_linf_gap"] = nullptr;
  }
  std::ofstream os(out_dir / "crosscheck.json", std::ios::trunc);
  os << j.dump(2) << "\n";
  return 0;
}

int cmd_evolve(const std::filesystem::path& config_path,
               const std::optional<std::filesystem::path>& resume_dir) {
  ExperimentConfig cfg = parse_experiment_config(config_path);
  if (cfg.outputs.empty()) throw std::invalid_argument("config: outputs directory is required");

  if (resume_dir) {
    TrajectoryRecord old = load_trajectory(*resume_dir);
    if (old.snapshot_paths.empty())
      throw std::invalid_argument("resume: no snapshots in " + resume_dir->string());
    ComplexField u = old.load_snapshot(old.snapshot_paths.size() - 1);
    const double t_k = old.snapshot_times.back();
    EvolveConfig ecfg = cfg.evolve;
    ecfg.grid = u.grid;
    ecfg.out_dir = *resume_dir;
    if (t_k >= ecfg.t_end - 1e-12) return 0;
    TrajectoryRecord leg =
        evolve(u, ecfg, t_k, ResumeOptions{old.snapshot_paths.size(), false});
    TrajectoryRecord merged = old;
    merged.status = leg.status;
    merged.valid_truncation = old.valid_truncation && leg.valid_truncation;
    for (std::size_t i = 0; i < leg.times.size(); ++i) {
      merged.times.push_back(leg.times[i]);
      merged.mass_series.push_back(leg.mass_series[i]);
      merged.energy_series.push_back(leg.energy_series[i]);
      merged.grad_series.push_back(leg.grad_series[i]);
      merged.l2h1_series.push_back(leg.l2h1_series[i]);
      merged.trunc_series.push_back(leg.trunc_series[i]);
      merged.dt_series.push_back(leg.dt_series[i]);
    }
    merged.snapshot_times.insert(merged.snapshot_times.end(), leg.snapshot_times.begin(),
                                 leg.snapshot_times.end());
    merged.snapshot_paths.insert(merged.snapshot_paths.end(), leg.snapshot_paths.begin(),
                                 leg.snapshot_paths.end());
    merged.check_consistent();
    persist_series(merged);
    return merged.status == RunStatus::completed ? 0 : 3;
  }

  ComplexField u0 = make_initial_data(cfg);
  EvolveConfig ecfg = cfg.evolve;
  if (cfg.normalize_mass_energy) {
    auto [scaled, lambda] = rescale_mass_energy(u0);
    u0 = std::move(scaled);
    ecfg.grid = u0.grid;
    (void)lambda;
  }
  std::filesystem::create_directories(cfg.outputs);
  ecfg.out_dir = cfg.outputs;
  TrajectoryRecord rec = evolve(u0, ecfg);

  ExperimentConfig resolved = cfg;
  resolved.grid = ecfg.grid;
  resolved.evolve = ecfg;
  write_experiment_config(cfg.outputs / "config.json", resolved);
  return rec.status == RunStatus::completed ? 0 : 3;
}

int cmd_morawetz(const std::filesystem::path& config_path,
                 const std::filesystem::path& trajectory_dir) {
  ExperimentConfig cfg = parse_experiment_config(config_path);
  TrajectoryRecord traj = load_trajectory(trajectory_dir);
  const auto& m = cfg.morawetz;

  // per-(d, eps, R, n, l) weights cache next to the trajectory
  {
    ComplexField first = traj.load_snapshot(0);
    const auto cache_dir = trajectory_dir / "weights_cache";
    std::filesystem::create_directories(cache_dir);
    for (int jr = 0; jr < m.k_r; ++jr) {
      const double R = m.r0 * std::exp(static_cast<double>(m.j) * (jr + 0.5) / m.k_r);
      char name[160];
      std::snprintf(name, sizeof name, "weights_d%d_eps%.6g_R%.9g_n%d_l%.9g.bin",
                    first.grid.d, m.epsilon, R, first.grid.n, first.grid.l);
      const auto path = cache_dir / name;
      if (!load_weights_cache(path, m.epsilon, R, first.grid.d, first.grid)) {
        MorawetzWeightSet w = build_weights(m.epsilon, R, first.grid.d);
        save_weights_cache(path, w, first.grid);
      }
    }
  }

  auto rows = morawetz_scan(traj, m.epsilon, m.a, m.t0, m.r0, m.j, m.k_r);
  write_morawetz_csv(trajectory_dir / "morawetz.csv", rows);

  BulkResult bulk = bulk_average(traj, m.epsilon, m.a, m.t0, m.r0, m.j, m.k_r);
  const double e0sq = traj.mass_series.front() * traj.energy_series.front();
  json j;
  j["bulk"] = bulk.bulk;
  j["nu"] = bulk.nu;
  j["averaged_dmdt"] = bulk.averaged_dmdt;
  j["averaged_err1"] = bulk.averaged_err1;
  j["averaged_err2"] = bulk.averaged_err2;
  j["e0_squared"] = e0sq;
  j["bulk_over_nu_e0sq"] = bulk.bulk / (bulk.nu * e0sq);
  std::ofstream os(trajectory_dir / "bulk.json", std::ios::trunc);
  os << j.dump(2) << "\n";
  return 0;
}

int cmd_verdict(const std::filesystem::path& trajectory_dir,
                const std::optional<std::filesystem::path>& certificate_path, double eps_sc,
                double t0_sc) {
  TrajectoryRecord traj = load_trajectory(trajectory_dir);
  if (traj.snapshot_paths.empty())
    throw std::invalid_argument("verdict: no snapshots in " + trajectory_dir.string());

  GroundStateCertificate cert;
  const auto local_cert = trajectory_dir / "certificate.json";
  if (certificate_path) {
    cert = read_certificate_json(*certificate_path);
  } else if (std::filesystem::exists(local_cert)) {
    cert = read_certificate_json(local_cert);
  } else {
    ComplexField first = traj.load_snapshot(0);
    cert = certify(solve_shooting(first.grid.d, 1e-10));
    write_certificate_json(local_cert, cert);
  }

  std::vector<CriterionScan> scans;
  if (traj.status != RunStatus::blowup_suspected) {
    const double win = std::cbrt(t0_sc);
    const double front = traj.snapshot_times.front();
    const double back = traj.snapshot_times.back();
    const double a_min = front + win;
    const double a_max = back - t0_sc;
    if (a_max < a_min - 1e-9)
      throw std::invalid_argument("verdict: trajectory too short for the configured T0");
    const int n_scans = 3;
    for (int i = 0; i < n_scans; ++i) {
      const double a = a_min + (a_max - a_min) * i / std::max(1, n_scans - 1);
      scans.push_back(criterion_scan(traj, a, t0_sc, eps_sc));
      if (a_max <= a_min) break;
    }
  }

  std::vector<double> tail;
  if (traj.snapshot_paths.size() >= 3) tail = asymptotic_state(traj).cauchy_tail;

  VerdictReport rep = verdict(traj, cert, scans, tail);
  write_verdict_json(trajectory_dir / "verdict.json", rep);
  return 0;
}

int cmd_report(const std::vector<std::filesystem::path>& run_dirs, std::ostream& out) {
  out << "dir,status,valid_truncation,mass0,energy0,me_product,l2h1_max,delta_prime,bulk,nu,"
         "bulk_over_nu_e0sq,verdict\n";
  for (const auto& dir : run_dirs) {
    TrajectoryRecord traj = load_trajectory(dir);
    double l2h1_max = 0.0;
    for (double v : traj.l2h1_series) l2h1_max = std::max(l2h1_max, v);
    std::string verdict_str = "-";
    std::string delta_prime = "-";
    const auto vpath = dir / "verdict.json";
    if (std::filesystem::exists(vpath)) {
      std::ifstream is(vpath);
      json j = json::parse(is);
      verdict_str = j.value("verdict", std::string{"-"});
      if (j.contains("delta_prime") && !j["delta_prime"].is_null())
        delta_prime = fmt_double(j["delta_prime"].get<double>());
    }
    std::string bulk = "-", nu = "-", cr = "-";
    const auto bpath = dir / "bulk.json";
    if (std::filesystem::exists(bpath)) {
      std::ifstream is(bpath);
      json j = json::parse(is);
      bulk = fmt_double(j.value("bulk", 0.0));
      nu = fmt_double(j.value("nu", 0.0));
      cr = fmt_double(j.value("bulk_over_nu_e0sq", 0.0));
    }
    out << dir.string() << "," << run_status_name(traj.status) << ","
        << (traj.valid_truncation ? "1" : "0") << "," << fmt_double(traj.mass_series.front())
        << "," << fmt_double(traj.energy_series.front()) << ","
        << fmt_double(traj.mass_series.front() * traj.energy_series.front()) << ","
        << fmt_double(l2h1_max) << "," << delta_prime << "," << bulk << "," << nu << "," << cr
        << "," << verdict_str << "\n";
  }
  return 0;
}

}  // namespace nls
