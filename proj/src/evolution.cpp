#include "nls/evolution.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

#include "nls/fft.hpp"
#include "nls/ground_state.hpp"
#include "nls/kernels.hpp"
#include "nls/spectral.hpp"
#include "nls/variational.hpp"

namespace nls {

namespace {

struct StepWorkspace {
  GridSpec grid;
  const SpectralTransform* tr;
  std::vector<double> k2;        // |k|^2 per mode
  std::vector<unsigned char> keep;  // dealias mask
  std::vector<cplx> half_mult;   // exp(-i |k|^2 dt/2)
  double half_dt = -1.0;
  std::vector<cplx> hat;
  std::vector<double> damping;   // absorbing layer weights (physical space)

  explicit StepWorkspace(const GridSpec& g) : grid(g), tr(&transform_for(g)) {
    const std::size_t size = g.size();
    k2.resize(size);
    keep.resize(size);
    hat.resize(size);
    const auto ks = wavenumber_table(g);
    const auto str = g.strides();
    const int cutoff = g.n / 3;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p) {
      const std::size_t idx = static_cast<std::size_t>(p);
      double s = 0.0;
      bool inside = true;
      for (int a = 0; a < g.d; ++a) {
        const std::size_t m = (idx / str[a]) % static_cast<std::size_t>(g.n);
        const double ka = ks[m];
        s += ka * ka;
        if (std::abs(g.freq(static_cast<int>(m))) > cutoff) inside = false;
      }
      k2[idx] = s;
      keep[idx] = inside ? 1 : 0;
    }
  }

  void ensure_half_mult(double dt) {
    if (dt == half_dt && !half_mult.empty()) return;
    half_mult.resize(k2.size());
    const double h = 0.5 * dt;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(k2.size()); ++p) {
      const double phase = -k2[static_cast<std::size_t>(p)] * h;
      half_mult[static_cast<std::size_t>(p)] = cplx{std::cos(phase), std::sin(phase)};
    }
    half_dt = dt;
  }

  void build_damping(double strength) {
    const auto xs = coord_table(grid);
    const auto str = grid.strides();
    damping.resize(grid.size());
    const double l = grid.l;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(damping.size()); ++p) {
      double xmax = 0.0;
      for (int a = 0; a < grid.d; ++a)
        xmax = std::max(xmax,
                        std::abs(xs[(static_cast<std::size_t>(p) / str[a]) %
                                    static_cast<std::size_t>(grid.n)]));
      const double t = (xmax / l - 0.8) / 0.2;
      double w = 0.0;
      if (t > 0.0) {
        const double tt = std::min(t, 1.0);
        w = tt * tt * tt * (10.0 + tt * (-15.0 + 6.0 * tt));  // quintic ramp
      }
      damping[static_cast<std::size_t>(p)] = strength * w * w;
    }
  }
};

struct StepDiagnostics {
  double l2sq = 0.0;
  double h1sq = 0.0;       // || grad u ||_2^2
  double hhalfsq = 0.0;    // || |k|^{1/2} u ||_2^2
};

/// Half linear, nonlinear phase, optional dealias, half linear. When `diag`
/// is non-null the conserved-quantity pieces are read off the final-spectrum
/// pass, so evolve gets per-step series without an extra transform.
void strang_step_inplace(ComplexField& u, double dt, bool apply_dealias, StepWorkspace& ws,
                         StepDiagnostics* diag) {
  const std::size_t size = u.values.size();
  ws.ensure_half_mult(dt);

  ws.tr->forward(u.values, ws.hat);
  kernels::multiply(std::span<cplx>(ws.hat), std::span<const cplx>(ws.half_mult));
  ws.tr->inverse(ws.hat, u.values);

  kernels::nonlinear_phase(std::span<cplx>(u.values), dt, 4.0 / (u.grid.d - 1));

  ws.tr->forward(u.values, ws.hat);
  if (apply_dealias) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(size); ++p)
      if (!ws.keep[static_cast<std::size_t>(p)]) ws.hat[static_cast<std::size_t>(p)] = cplx{};
  }
  kernels::multiply(std::span<cplx>(ws.hat), std::span<const cplx>(ws.half_mult));

  if (diag) {
    const std::size_t nb = (size + kernels::reduce_block - 1) / kernels::reduce_block;
    std::vector<double> p0(nb, 0.0), p1(nb, 0.0), ph(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
      const std::size_t lo = static_cast<std::size_t>(b) * kernels::reduce_block;
      const std::size_t hi = std::min(size, lo + kernels::reduce_block);
      double s0 = 0.0, s1 = 0.0, sh = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        const double a2 = std::norm(ws.hat[i]);
        s0 += a2;
        s1 += ws.k2[i] * a2;
        sh += std::sqrt(ws.k2[i]) * a2;
      }
      p0[static_cast<std::size_t>(b)] = s0;
      p1[static_cast<std::size_t>(b)] = s1;
      ph[static_cast<std::size_t>(b)] = sh;
    }
    double s0 = 0.0, s1 = 0.0, sh = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      s0 += p0[b];
      s1 += p1[b];
      sh += ph[b];
    }
    const double scale = u.grid.cell_volume() / static_cast<double>(size);
    diag->l2sq = s0 * scale;
    diag->h1sq = s1 * scale;
    diag->hhalfsq = sh * scale;
  }

  ws.tr->inverse(ws.hat, u.values);
}

std::filesystem::path unique_run_dir() {
  static std::atomic<unsigned> counter{0};
  const auto base = std::filesystem::temp_directory_path() / "nls_runs";
  std::filesystem::create_directories(base);
  for (;;) {
    auto p = base / ("run_" + std::to_string(::getpid()) + "_" +
                     std::to_string(counter.fetch_add(1)));
    if (!std::filesystem::exists(p)) {
      std::filesystem::create_directories(p);
      return p;
    }
  }
}

}  // namespace

ComplexField strang_step(const ComplexField& u, double dt, bool apply_dealias,
                         double max_phase) {
  const double expo = 4.0 / (u.grid.d - 1);
  const double amp = kernels::max_abs(u.values);
  if (dt * std::pow(amp, expo) >= max_phase)
    throw PhaseCapError("strang_step: dt * max|u|^{4/(d-1)} exceeds the phase cap");
  StepWorkspace ws(u.grid);
  ComplexField out = u;
  strang_step_inplace(out, dt, apply_dealias, ws, nullptr);
  if (u.time_tag) out.time_tag = *u.time_tag + dt;
  return out;
}

TrajectoryRecord evolve(const ComplexField& u0, const EvolveConfig& cfg, double t_start,
                        const ResumeOptions& resume) {
  cfg.validate();
  if (u0.grid != cfg.grid) throw std::invalid_argument("evolve: grid mismatch");
  if (!all_finite(u0)) throw std::invalid_argument("evolve: non-finite initial data");

  TrajectoryRecord rec;
  rec.dir = cfg.out_dir.empty() ? unique_run_dir() : cfg.out_dir;
  std::filesystem::create_directories(rec.dir / "snapshots");

  StepWorkspace ws(cfg.grid);
  if (cfg.absorbing_layer) ws.build_damping(5.0);

  ComplexField u = u0;
  u.time_tag = t_start;
  const double expo = 4.0 / (cfg.grid.d - 1);
  const double u0_inf = kernels::max_abs(u.values);
  const double pot_coef = (cfg.grid.d - 1.0) / (2.0 * (cfg.grid.d + 1.0));
  const double p_expo = potential_exponent(cfg.grid.d);
  const double vol = cfg.grid.cell_volume();

  std::size_t snapshot_index = resume.snapshot_index_offset;
  auto take_snapshot = [&](const ComplexField& f) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.nlsf", snapshot_index);
    const auto path = rec.dir / "snapshots" / name;
    write_nlsf(path, f);
    rec.snapshot_times.push_back(*f.time_tag);
    rec.snapshot_paths.push_back(path);
    ++snapshot_index;
  };

  auto record_state = [&](double t, double dt_used, const StepDiagnostics* diag) {
    double l2sq, h1sq, hhalfsq;
    if (diag) {
      l2sq = diag->l2sq;
      h1sq = diag->h1sq;
      hhalfsq = diag->hhalfsq;
      (void)hhalfsq;
    } else {
      l2sq = kernels::sum_abs2(u.values) * vol;
      const double h1 = sobolev_seminorm(u, 1.0);
      h1sq = h1 * h1;
    }
    const double pot = pot_coef * kernels::sum_abs_pow(u.values, p_expo) * vol;
    rec.times.push_back(t);
    rec.mass_series.push_back(l2sq);
    rec.energy_series.push_back(0.5 * h1sq - pot);
    rec.grad_series.push_back(std::sqrt(h1sq));
    rec.l2h1_series.push_back(std::sqrt(l2sq) * std::sqrt(h1sq));
    rec.trunc_series.push_back(truncation_fraction(u));
    rec.dt_series.push_back(dt_used);
  };

  if (resume.record_initial) {
    record_state(t_start, cfg.dt, nullptr);
    take_snapshot(u);
    if (rec.trunc_series.back() > cfg.truncation_limit) rec.valid_truncation = false;
  }

  double t = t_start;
  double dt_cur = cfg.dt;
  int halvings = 0;
  long step = 0;
  bool stop = false;

  while (!stop && t < cfg.t_end - 1e-12 * std::max(1.0, std::abs(cfg.t_end))) {
    double dt_step = std::min(dt_cur, cfg.t_end - t);

    // phase cap: halve until dt * max|u|^{4/(d-1)} < max_phase
    const double amp = kernels::max_abs(u.values);
    while (dt_step * std::pow(amp, expo) >= cfg.max_phase) {
      dt_cur *= 0.5;
      dt_step = std::min(dt_cur, cfg.t_end - t);
      if (++halvings > cfg.max_halvings) {
        rec.status = RunStatus::blowup_suspected;
        stop = true;
        break;
      }
    }
    if (stop) break;

    StepDiagnostics diag;
    strang_step_inplace(u, dt_step, cfg.dealias, ws, &diag);
    if (cfg.absorbing_layer) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(u.values.size()); ++i)
        u.values[static_cast<std::size_t>(i)] *=
            std::exp(-dt_step * ws.damping[static_cast<std::size_t>(i)]);
    }
    t += dt_step;
    u.time_tag = t;
    ++step;
    record_state(t, dt_step, cfg.absorbing_layer ? nullptr : &diag);

    if (rec.trunc_series.back() > cfg.truncation_limit) {
      rec.valid_truncation = false;
      if (cfg.truncation_policy == TruncationPolicy::abort) {
        rec.status = RunStatus::truncation_exceeded;
        stop = true;
      }
    }
    const double inf_now = kernels::max_abs(u.values);
    if (u0_inf > 0.0 && inf_now > cfg.blowup_factor * u0_inf) {
      rec.status = RunStatus::blowup_suspected;
      stop = true;
    }
    if (!std::isfinite(inf_now)) {
      rec.status = RunStatus::blowup_suspected;
      stop = true;
    }

    if (step % cfg.checkpoint_stride == 0 || stop ||
        !(t < cfg.t_end - 1e-12 * std::max(1.0, std::abs(cfg.t_end))))
      take_snapshot(u);
  }

  if (resume.record_initial) {
    rec.check_consistent();
    persist_series(rec);  // resumed legs are merged and persisted by the caller
  }
  return rec;
}

ComplexField galilean_boost(const ComplexField& u, std::span<const double> v) {
  const GridSpec& g = u.grid;
  if (static_cast<int>(v.size()) != g.d)
    throw std::invalid_argument("galilean_boost: dimension mismatch");
  const double unit = g.lattice_unit();
  for (double c : v) {
    const double m = c / unit;
    if (std::abs(m - std::round(m)) > 1e-9)
      throw std::invalid_argument("galilean_boost: velocity not on the reciprocal lattice");
  }
  const auto xs = coord_table(g);
  const auto str = g.strides();
  ComplexField out = u;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(out.values.size()); ++p) {
    double phase = 0.0;
    for (int a = 0; a < g.d; ++a)
      phase += v[a] * xs[(static_cast<std::size_t>(p) / str[a]) %
                         static_cast<std::size_t>(g.n)];
    out.values[static_cast<std::size_t>(p)] *= cplx{std::cos(phase), std::sin(phase)};
  }
  return out;
}

ComplexField spectral_translate(const ComplexField& u, std::span<const double> shift) {
  const GridSpec& g = u.grid;
  if (static_cast<int>(shift.size()) != g.d)
    throw std::invalid_argument("spectral_translate: dimension mismatch");
  const auto& tr = transform_for(g);
  std::vector<cplx> hat = tr.forward(u.values);
  const auto ks = wavenumber_table(g);
  const auto str = g.strides();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(hat.size()); ++p) {
    double phase = 0.0;
    for (int a = 0; a < g.d; ++a)
      phase -= shift[a] * ks[(static_cast<std::size_t>(p) / str[a]) %
                             static_cast<std::size_t>(g.n)];
    hat[static_cast<std::size_t>(p)] *= cplx{std::cos(phase), std::sin(phase)};
  }
  ComplexField out(g);
  tr.inverse(hat, out.values);
  out.time_tag = u.time_tag;
  return out;
}

std::pair<ComplexField, double> rescale_mass_energy(const ComplexField& u0) {
  const double m = mass(u0);
  const double e = energy(u0);
  if (!(e > 0.0))
    throw std::invalid_argument("rescale_mass_energy: E(u0) <= 0, normalization undefined");
  const double lambda = std::sqrt(m / e);
  GridSpec g2(u0.grid.d, u0.grid.n, u0.grid.l / lambda);
  ComplexField out(g2, u0.values);
  kernels::scale(std::span<cplx>(out.values), std::pow(lambda, 0.5 * (u0.grid.d - 1)));
  out.time_tag = u0.time_tag;
  return {std::move(out), lambda};
}

AsymptoticState asymptotic_state(const TrajectoryRecord& traj) {
  if (traj.snapshot_paths.size() < 3)
    throw std::invalid_argument("asymptotic_state: need at least 3 checkpoints");
  AsymptoticState st;
  ComplexField prev;
  for (std::size_t i = 0; i < traj.snapshot_paths.size(); ++i) {
    ComplexField u = traj.load_snapshot(i);
    const double t = traj.snapshot_times[i];
    ComplexField w = free_propagator(u, -t);
    if (i > 0) {
      ComplexField diff = w;
      kernels::add_scaled(std::span<cplx>(diff.values), std::span<const cplx>(prev.values),
                          cplx{-1.0, 0.0});
      st.tail_times.push_back(t);
      st.cauchy_tail.push_back(h1_norm(diff));
    }
    prev = std::move(w);
  }
  st.last_w = std::move(prev);
  return st;
}

}  // namespace nls
