#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nls/field.hpp"

namespace nls {

enum class RunStatus { completed, blowup_suspected, truncation_exceeded };

/// What to do when the truncation mass fraction exceeds its limit: keep
/// going and mark the record invalid as an R^d proxy, or stop the run.
enum class TruncationPolicy { flag, abort };

struct EvolveConfig {
  GridSpec grid;
  double dt = 1e-3;
  double t_end = 1.0;
  int checkpoint_stride = 10;   // steps between stored snapshots
  bool dealias = true;          // 2/3-rule truncation after the nonlinear phase
  double max_phase = 0.5;       // cap on dt * max|u|^{4/(d-1)}
  double blowup_factor = 1e3;   // guard on ||u||_inf / ||u0||_inf
  int max_halvings = 20;
  double truncation_limit = 1e-8;
  TruncationPolicy truncation_policy = TruncationPolicy::flag;
  bool absorbing_layer = false;  // experimental, off by default
  std::filesystem::path out_dir; // empty: unique directory under the system temp

  void validate() const {
    grid.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("EvolveConfig: dt must be positive");
    if (checkpoint_stride < 1)
      throw std::invalid_argument("EvolveConfig: checkpoint_stride must be >= 1");
    if (!(max_phase > 0.0 && max_phase < 1.0))
      throw std::invalid_argument("EvolveConfig: max_phase must be in (0, 1)");
  }
};

/// Per-step diagnostics series plus snapshot handles on disk.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> mass_series;
  std::vector<double> energy_series;
  std::vector<double> grad_series;    // ||grad u||_2
  std::vector<double> l2h1_series;    // ||u||_2 ||u||_{H^1 dot}
  std::vector<double> trunc_series;
  std::vector<double> dt_series;

  std::vector<double> snapshot_times;
  std::vector<std::filesystem::path> snapshot_paths;

  RunStatus status = RunStatus::completed;
  bool valid_truncation = true;  // truncation fraction stayed below the limit
  std::filesystem::path dir;

  ComplexField load_snapshot(std::size_t i) const { return read_nlsf(snapshot_paths.at(i)); }

  void check_consistent() const {
    const std::size_t n = times.size();
    if (mass_series.size() != n || energy_series.size() != n || grad_series.size() != n ||
        l2h1_series.size() != n || trunc_series.size() != n || dt_series.size() != n)
      throw std::runtime_error("TrajectoryRecord: series length mismatch");
    for (std::size_t i = 1; i < n; ++i)
      if (!(times[i] > times[i - 1]))
        throw std::runtime_error("TrajectoryRecord: times not increasing");
  }
};

/// Write series.csv + status.json into record.dir.
void persist_series(const TrajectoryRecord& record);

/// Rebuild a record from a trajectory directory (series.csv + snapshots/).
TrajectoryRecord load_trajectory(const std::filesystem::path& dir);

std::string run_status_name(RunStatus s);

}  // namespace nls
