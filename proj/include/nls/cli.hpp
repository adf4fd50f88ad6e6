#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nls/trajectory.hpp"

namespace nls {

struct InitialDataSpec {
  std::string family;  // gaussian | soliton | soliton_perturbed | file
  double amplitude = 1.0;      // gaussian
  double width = 1.0;          // gaussian
  double scale = 1.0;          // soliton families: multiplier on Q
  double width_scale = 1.0;    // soliton families: lambda in lambda^{(d-1)/2} Q(lambda x)
  std::uint64_t noise_seed = 0;
  double noise_amplitude = 0.0;
  std::vector<double> boost;   // reciprocal-lattice velocity, defaults to zero
  std::string path;            // file family: NLSF snapshot
};

struct MorawetzConfig {
  double epsilon = 0.1;
  double r0 = 1.0;
  int j = 10;
  int k_r = 16;
  double a = 0.0;
  double t0 = 20.0;
};

struct CriterionConfig {
  double eps_sc = 0.1;
  double t0_sc = 20.0;
};

struct ExperimentConfig {
  int schema_version = 1;
  int dimension = 3;
  GridSpec grid{3, 96, 16.0};
  InitialDataSpec initial_data;
  EvolveConfig evolve;
  MorawetzConfig morawetz;
  CriterionConfig criterion;
  std::filesystem::path outputs;
  std::uint64_t seed = 1;
  bool normalize_mass_energy = false;
};

/// Strict JSON parsing: unknown keys are rejected at every level.
ExperimentConfig parse_experiment_config(const std::filesystem::path& path);
void write_experiment_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

/// Build the configured initial data (solves for Q in-process when needed).
ComplexField make_initial_data(const ExperimentConfig& cfg);

// Command bodies shared by the CLI binary and the tests. Each returns the
// process exit code: 0 success, 2 contract/config error, 3 numerical-guard
// termination.
int cmd_ground_state(int d, double tol, const std::filesystem::path& out_dir);
int cmd_evolve(const std::filesystem::path& config_path,
               const std::optional<std::filesystem::path>& resume_dir = std::nullopt);
int cmd_morawetz(const std::filesystem::path& config_path,
                 const std::filesystem::path& trajectory_dir);
int cmd_verdict(const std::filesystem::path& trajectory_dir,
                const std::optional<std::filesystem::path>& certificate_path = std::nullopt,
                double eps_sc = 0.1, double t0_sc = 20.0);
int cmd_report(const std::vector<std::filesystem::path>& run_dirs, std::ostream& out);

}  // namespace nls
