#pragma once

#include "krflow/config.hpp"

#include <optional>
#include <string>

namespace krf {

enum ExitCode { exit_ok = 0, exit_fail = 1, exit_usage = 2, exit_numerical = 3 };

const char* version();

/// Initial metric of a scenario, rescaled to V = 4π when the scenario asks for it.
ConformalMetric initial_metric(const Scenario& scenario, const GridPtr& grid);

/// Bump amplitude whose initial Calabi energy (1/V)∫(K-1)² equals target.
double amplitude_for_calabi(const Scenario& scenario, const GridPtr& grid, double target);

struct RunArtifacts {
  std::optional<Trajectory> trajectory;
  std::optional<TrajectoryReport> report;
  std::string error;  // numerical error text, empty on success
  std::string timeseries_path, report_path;
  int exit_code = exit_ok;
};

/// Runs, evaluates, and writes artifacts into `out_dir` (empty: no files).
RunArtifacts run_scenario(const ExperimentSpec& spec, const std::string& out_dir);

struct SweepPoint {
  double epsilon = 0.0;  // sweep coordinate as configured
  double amplitude = 0.0;
  double epsilon_calabi = 0.0;
  double grad_u_t0 = 0.0;
  double ratio = 0.0;  // ‖∇u‖(t0)/ε_Calabi^{1/4}
  double K_eff = 0.0;
  double C_eff = 0.0;
  std::string status;  // "ok" or the error text
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double ratio_spread = std::numeric_limits<double>::quiet_NaN();  // max/min ratio
  int failures = 0;
  int exit_code = exit_ok;
};

/// One run per sweep value; failing points are tabulated, never abort the sweep.
SweepResult sweep_epsilon(const ExperimentSpec& spec, const std::string& out_dir);

void write_timeseries(const Trajectory& traj, const std::string& path);
std::string format_report(const ExperimentSpec& spec, const Trajectory* traj,
                          const TrajectoryReport* rep, const std::string& error);

}  // namespace krf
