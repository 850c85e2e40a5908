#pragma once

#include "krflow/potential.hpp"
#include "krflow/spectral.hpp"

#include <memory>
#include <string>
#include <vector>

namespace krf {

enum class Scheme { rk4, semi_implicit };

struct FlowConfig {
  double dt_init = 0.0;  // 0 picks ¼h²·min e^{2w} (rk4) or 4h²·min e^{2w}
  double t_end = 1.0;
  Scheme scheme = Scheme::rk4;
  double vol_tol = 1e-9;
  double class_tol = 1e-3;
  double potential_tol = 1e-10;
  double record_every = 0.01;
  int m_max = 3;
  int k_per_mode = 4;
  double band_tol = 0.0;  // 0 means 50h²
  double converge_tol = 1e-12;
  bool project_volume = true;
  bool compute_spectrum = true;
};

struct FlowState {
  double t = 0.0;
  double dt = 0.0;
  ConformalMetric metric;
  RicciPotential u;
  FunctionalBundle funcs;
  Field phi;
  double lambda_g = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> holo_band;
  std::shared_ptr<const Spectrum> spectrum;
};

struct Trajectory {
  std::vector<FlowState> states;
  std::vector<std::string> events;
  std::vector<std::pair<double, double>> dt_history;  // (t, dt) at every change
  bool converged = false;
  double converged_at = std::numeric_limits<double>::quiet_NaN();
};

/// ∂_t e^{2w} = e^{2w} - 1 + ½Δ₀ log e^{2w}, i.e. ∂_t w = ½(1 - K).
Field flow_rhs(const Grid& grid, const Field& rho);

/// Builds a fully diagnosed state from the area density and φ.
FlowState make_state(const GridPtr& grid, double t, double dt, const Field& rho, const Field& phi,
                     const FlowConfig& cfg);

double stable_dt(const ConformalMetric& metric, Scheme scheme);

/// One metric-only step; no potential is needed, so it also works off the normalized class.
ConformalMetric advance_metric(const ConformalMetric& metric, double dt);

/// One step of the configured scheme. Throws StepReject on a bad step.
FlowState step(const FlowState& state, double dt, const FlowConfig& cfg);

Trajectory run(const FlowConfig& cfg, const ConformalMetric& initial);

/// sup |e^{2w(t)} - e^{2w(0)} - ½Δ₀φ| with the pointwise Laplacian.
double check_kahler_class(const FlowState& state, const FlowState& initial);

struct LogDet {
  Field F;
  double c_t;
  double residual;
};

/// F = log det g(t)/det g(0) against u(t) - u(0) - φ - c(t), with u from the trapezoid solver.
LogDet log_det_bookkeeping(const FlowState& state, const FlowState& initial);

}  // namespace krf
