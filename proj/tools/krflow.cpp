#include "krflow/errors.hpp"
#include "krflow/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace krf;

namespace {

// flow from the spec's initial metric up to t and return the last state
FlowState state_at(const ExperimentSpec& spec, double t) {
  const GridPtr grid = make_grid(spec.grid_n);
  FlowConfig cfg = spec.flow;
  if (cfg.band_tol <= 0.0) cfg.band_tol = default_band_tol(*grid);
  cfg.t_end = t;
  cfg.converge_tol = 0.0;
  if (t > 0.0) cfg.record_every = std::min(cfg.record_every, t);
  Trajectory traj = run(cfg, initial_metric(spec.scenario, grid));
  return traj.states.back();
}

void print_report(const CheckReport& c) {
  std::printf("%-22s %-13s gate=%d margin=%.6g\n", c.check_id.c_str(), to_string(c.verdict), int(c.gate_satisfied),
              c.margin);
  for (const auto& [k, v] : c.aux) std::printf("    %s = %.10g\n", k.c_str(), v);
  if (!c.note.empty()) std::printf("    note: %s\n", c.note.c_str());
}

int cmd_run(const std::string& path, const std::string& out) {
  const ExperimentSpec spec = load_spec(path);
  const RunArtifacts art = run_scenario(spec, out.empty() ? spec.output_dir : out);
  if (!art.error.empty()) std::fprintf(stderr, "error: %s\n", art.error.c_str());
  if (art.report) {
    for (const auto& c : art.report->summary)
      std::printf("%-22s %s\n", c.check_id.c_str(), to_string(c.verdict));
    std::printf("decay rate of |u-a|: %.6g\n", art.report->decay_rate_u);
  }
  std::printf("report: %s\n", art.report_path.c_str());
  return art.exit_code;
}

int cmd_sweep(const std::string& path, const std::string& out) {
  const ExperimentSpec spec = load_spec(path);
  const SweepResult res = sweep_epsilon(spec, out.empty() ? spec.output_dir : out);
  std::printf("%-12s %-12s %-12s %-12s %s\n", "epsilon", "eps_calabi", "grad_u_t0", "ratio", "status");
  for (const auto& p : res.points)
    std::printf("%-12.5g %-12.5g %-12.5g %-12.5g %s\n", p.epsilon, p.epsilon_calabi, p.grad_u_t0, p.ratio,
                p.status.c_str());
  std::printf("slope %.6g  intercept %.6g  ratio spread %.6g  failures %d\n", res.slope, res.intercept,
              res.ratio_spread, res.failures);
  return res.exit_code;
}

int cmd_check(const std::string& path, double t) {
  const ExperimentSpec spec = load_spec(path);
  const FlowState s = state_at(spec, t);
  std::printf("t = %.10g\n", s.t);
  const double delta = std::isnan(spec.monitors.delta) ? s.lambda_g - 1.0 : spec.monitors.delta;
  bool fail = false;
  std::vector<CheckReport> reps = {check_weighted_poincare(s, delta), check_c0_vs_Y(s, spec.monitors.rho)};
  if (s.spectrum) {
    const EigenData eig =
        eigen_data(*s.spectrum, find_entry(*s.spectrum, spec.monitors.branch.mode, spec.monitors.branch.index));
    reps.push_back(check_bochner(s, eig));
    reps.push_back(check_gradient_estimate(s, eig, sobolev_constant_estimate(s.metric)));
  }
  for (const auto& c : reps) {
    print_report(c);
    fail = fail || c.verdict == Verdict::fail;
  }
  return fail ? exit_fail : exit_ok;
}

int cmd_spectrum(const std::string& path, double t) {
  ExperimentSpec spec = load_spec(path);
  spec.flow.compute_spectrum = true;
  const FlowState s = state_at(spec, t);
  std::printf("t = %.10g  lambda_g = %.12g\n", s.t, s.lambda_g);
  std::printf("%-4s %-4s %s\n", "m", "k", "eigenvalue");
  for (const auto& e : s.spectrum->entries) std::printf("%-4d %-4d %.12g\n", e.mode, e.index_in_mode, e.value);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized Kahler-Ricci flow on axisymmetric metrics on CP1"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  double at = 0.0;

  auto* run = app.add_subcommand("run", "run one scenario and write timeseries and report");
  run->add_option("spec", spec_path, "experiment spec file")->required();
  run->add_option("-o,--out", out_dir, "output directory (default: output_dir from the spec)");

  auto* sweep = app.add_subcommand("sweep", "one run per sweep value, then the scaling fit");
  sweep->add_option("spec", spec_path, "experiment spec file")->required();
  sweep->add_option("-o,--out", out_dir, "output directory (default: output_dir from the spec)");

  auto* check = app.add_subcommand("check", "evaluate single-state monitors at time t");
  check->add_option("spec", spec_path, "experiment spec file")->required();
  check->add_option("--at", at, "flow time")->required()->check(CLI::NonNegativeNumber);

  auto* spectrum = app.add_subcommand("spectrum", "print eigenvalues of the weighted Laplacian at time t");
  spectrum->add_option("spec", spec_path, "experiment spec file")->required();
  spectrum->add_option("--at", at, "flow time")->required()->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*run) return cmd_run(spec_path, out_dir);
    if (*sweep) return cmd_sweep(spec_path, out_dir);
    if (*check) return cmd_check(spec_path, at);
    if (*spectrum) return cmd_spectrum(spec_path, at);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return exit_usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return exit_numerical;
  }
  return exit_usage;
}
