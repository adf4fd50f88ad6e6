// Command-line front end: ground-state, evolve, morawetz, verdict, report.
// Exit codes: 0 success, 2 contract/config errors, 3 numerical-guard
// termination.

#include <CLI11.hpp>

#include <iostream>

#include "nls/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral simulator and diagnostics for the focusing "
               "H^{1/2}-critical NLS"};
  app.require_subcommand(1);

  auto* gs = app.add_subcommand("ground-state", "solve for Q, certify, write outputs");
  int gs_d = 3;
  double gs_tol = 1e-10;
  std::string gs_out = "ground_state";
  gs->add_option("--d", gs_d, "dimension (3, 4 or 5)");
  gs->add_option("--tol", gs_tol, "solver tolerance");
  gs->add_option("--out", gs_out, "output directory");

  auto* ev = app.add_subcommand("evolve", "run a trajectory from a config file");
  std::string ev_config;
  std::string ev_resume;
  ev->add_option("--config", ev_config, "experiment config JSON")->required();
  ev->add_option("--resume", ev_resume, "existing trajectory directory to continue");

  auto* mo = app.add_subcommand("morawetz", "ledger + bulk average for a trajectory");
  std::string mo_config, mo_traj;
  mo->add_option("--config", mo_config, "experiment config JSON")->required();
  mo->add_option("--traj", mo_traj, "trajectory directory")->required();

  auto* ve = app.add_subcommand("verdict", "criterion scans + verdict.json");
  std::string ve_traj, ve_cert;
  double ve_eps = 0.1, ve_t0 = 20.0;
  ve->add_option("--traj", ve_traj, "trajectory directory")->required();
  ve->add_option("--cert", ve_cert, "ground-state certificate JSON");
  ve->add_option("--eps", ve_eps, "criterion smallness parameter");
  ve->add_option("--t0", ve_t0, "criterion window parameter T0");

  auto* re = app.add_subcommand("report", "aggregate run directories into a summary table");
  std::vector<std::string> re_dirs;
  re->add_option("dirs", re_dirs, "run directories");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gs->parsed()) return nls::cmd_ground_state(gs_d, gs_tol, gs_out);
    if (ev->parsed()) {
      std::optional<std::filesystem::path> resume;
      if (!ev_resume.empty()) resume = ev_resume;
      return nls::cmd_evolve(ev_config, resume);
    }
    if (mo->parsed()) return nls::cmd_morawetz(mo_config, mo_traj);
    if (ve->parsed()) {
      std::optional<std::filesystem::path> cert;
      if (!ve_cert.empty()) cert = ve_cert;
      return nls::cmd_verdict(ve_traj, cert, ve_eps, ve_t0);
    }
    if (re->parsed()) {
      std::vector<std::filesystem::path> dirs(re_dirs.begin(), re_dirs.end());
      return nls::cmd_report(dirs, std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
