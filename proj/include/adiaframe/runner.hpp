#pragma once

#include <string>
#include <vector>

#include "adiaframe/config.hpp"
#include "adiaframe/csv.hpp"
#include "adiaframe/trajectory.hpp"
#include "json.hpp"

namespace adiaframe {

/// One asserted invariant with its measured value.
struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

struct RunReport {
  ScenarioConfig config;
  std::string config_hash;
  nlohmann::ordered_json summary;  // scenario-specific results
  std::vector<Check> checks;
  std::vector<std::string> files;  // written outputs, relative to the output directory
  std::vector<std::string> warnings;
  double wall_clock = 0.0;         // seconds

  bool all_passed() const;
  nlohmann::ordered_json to_json() const;
};

struct RunOptions {
  bool write_files = true;
  bool quiet = true;
  std::vector<std::string> warnings;  // carried into the report
};

/// Executes the scenario, writes CSV series and `<prefix>_report.json` into
/// config.output.directory.
RunReport run(const ScenarioConfig& config, const RunOptions& options = {});

/// t, x..., v..., pop_k, re/im of the upper off-diagonal rho entries,
/// E_mean, Q_cum, W_cum, S_info, kinetic, potential.
CsvTable trajectory_table(const Trajectory& traj);

/// Machine-readable record for a failed run.
nlohmann::ordered_json error_record(const std::string& kind, const std::string& message);

}  // namespace adiaframe
