#include "nls/trajectory.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nls/textio.hpp"

namespace nls {

std::string run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blowup_suspected: return "terminated: focusing blow-up suspected";
    case RunStatus::truncation_exceeded: return "terminated: truncation fraction exceeded";
  }
  return "unknown";
}

void persist_series(const TrajectoryRecord& rec) {
  std::ofstream os(rec.dir / "series.csv", std::ios::trunc);
  if (!os) throw std::runtime_error("persist_series: cannot write series.csv");
  os << "t,mass,energy,grad_l2,l2h1,trunc_frac,dt_used\n";
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    os << fmt_double(rec.times[i]) << "," << fmt_double(rec.mass_series[i]) << ","
       << fmt_double(rec.energy_series[i]) << "," << fmt_double(rec.grad_series[i]) << ","
       << fmt_double(rec.l2h1_series[i]) << "," << fmt_double(rec.trunc_series[i]) << ","
       << fmt_double(rec.dt_series[i]) << "\n";
  }

  nlohmann::json j;
  j["status"] = run_status_name(rec.status);
  j["valid_truncation"] = rec.valid_truncation;
  std::ofstream st(rec.dir / "status.json", std::ios::trunc);
  st << j.dump(2) << "\n";
}

TrajectoryRecord load_trajectory(const std::filesystem::path& dir) {
  TrajectoryRecord rec;
  rec.dir = dir;

  std::ifstream is(dir / "series.csv");
  if (!is) throw std::runtime_error("load_trajectory: missing series.csv in " + dir.string());
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v[7];
    char comma;
    for (int i = 0; i < 7; ++i) {
      ss >> v[i];
      if (i < 6) ss >> comma;
    }
    if (!ss && !ss.eof()) throw std::runtime_error("load_trajectory: malformed series.csv row");
    rec.times.push_back(v[0]);
    rec.mass_series.push_back(v[1]);
    rec.energy_series.push_back(v[2]);
    rec.grad_series.push_back(v[3]);
    rec.l2h1_series.push_back(v[4]);
    rec.trunc_series.push_back(v[5]);
    rec.dt_series.push_back(v[6]);
  }

  const auto snapdir = dir / "snapshots";
  if (std::filesystem::is_directory(snapdir)) {
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::directory_iterator(snapdir))
      if (e.path().extension() == ".nlsf") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      const ComplexField f = read_nlsf(p);
      rec.snapshot_paths.push_back(p);
      rec.snapshot_times.push_back(f.time_tag.value_or(0.0));
    }
  }

  const auto status_path = dir / "status.json";
  if (std::filesystem::exists(status_path)) {
    std::ifstream st(status_path);
    nlohmann::json j = nlohmann::json::parse(st);
    const std::string s = j.value("status", "completed");
    if (s.find("blow-up") != std::string::npos)
      rec.status = RunStatus::blowup_suspected;
    else if (s.find("truncation") != std::string::npos)
      rec.status = RunStatus::truncation_exceeded;
    rec.valid_truncation = j.value("valid_truncation", true);
  }

  rec.check_consistent();
  return rec;
}

}  // namespace nls
