#pragma once

#include "krflow/flow.hpp"

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace krf {

enum class Verdict { pass, fail, gate_not_met, report_only };

const char* to_string(Verdict v);

struct CheckReport {
  std::string check_id;
  std::string anchor;
  bool gate_satisfied = true;
  double margin = 0.0;
  double tolerance = 0.0;
  std::vector<std::pair<std::string, double>> aux;
  Verdict verdict = Verdict::report_only;
  std::string note;

  double get(const std::string& key) const;
  void set(const std::string& key, double value);
};

/// Applies the three-valued rule: out of gate never fails.
Verdict judge(bool gate, double margin, double tolerance);

/// (1/V)∫(s - n)²dv with s = K.
double calabi_energy(const ConformalMetric& metric);

/// δ′ defaults to delta_prime(min(delta_measured, λ - 1), osc u).
CheckReport check_weighted_poincare(const FlowState& state, double delta_measured,
                                    std::optional<double> delta_prime_override = std::nullopt);

CheckReport check_Y_decay(const Trajectory& traj);

CheckReport check_c0_vs_Y(const FlowState& state, double rho);

CheckReport check_c2_estimate(const Trajectory& traj);

struct Branch {
  int mode = 0;
  int index = 2;
};

/// psi_scale multiplies the normalized eigenfunction (1 reproduces the identity).
CheckReport check_eigenvalue_derivative(const Trajectory& traj, Branch branch = {},
                                        double psi_scale = 1.0);

/// Derivative mismatch at one interior state i, relative to |dλ/dt| + 1e-8.
struct EigenDerivativeSample {
  double t, fd, formula, rel;
};
EigenDerivativeSample eigenvalue_derivative_at(const Trajectory& traj, int i, Branch branch,
                                               double psi_scale = 1.0);

/// Sup residual of the |∇u|² evolution at interior state i.
struct GradnormSample {
  double residual;   // sup |∂_t|∇u|² - RHS|
  double fd_spread;  // sup |five-point - three-point| time derivative, 0 where only three points exist
};
GradnormSample gradnorm_sample_at(const Trajectory& traj, int i);
double gradnorm_residual_at(const Trajectory& traj, int i);
CheckReport check_gradnorm_evolution(const Trajectory& traj);

CheckReport check_Z_derivative(const Trajectory& traj);

struct BochnerTerms {
  Field lhs, hess_pure, hess_mixed, zeroth, ricci_potential, mixed_third, grad_u_sq, f;
};
BochnerTerms bochner_terms(const FlowState& state, const EigenData& eig);
CheckReport check_bochner(const FlowState& state, const EigenData& eig);

CheckReport check_gradient_estimate(const FlowState& state, const EigenData& eig, double c_s);

/// L <= 0 selects the §2.3 calibration Φ₀·ε^{-1/2} with ε = ‖∇u(0)‖.
CheckReport bootstrap_tracker(const Trajectory& traj, double L, double phi0, double delta);

CheckReport short_time_suite(const Trajectory& traj, double Lambda, double eps_calabi,
                             double t0, double delta);

struct MonitorParams {
  double delta = std::numeric_limits<double>::quiet_NaN();   // NaN: λ(g₀) - 1
  double Lambda = std::numeric_limits<double>::quiet_NaN();  // NaN: max|K(0)|
  double rho = 0.5;
  double L = 0.0;
  double phi0 = 2.0;
  double t0 = 0.1;
  Branch branch;
  std::vector<std::string> checks;  // empty: all
};

const std::vector<std::string>& known_checks();

struct TrajectoryReport {
  std::vector<CheckReport> summary;
  std::map<std::string, std::vector<std::pair<double, double>>> series;  // check → (t, margin)
  std::vector<std::string> events;
  double decay_rate_u = std::numeric_limits<double>::quiet_NaN();
  double decay_rate_Y = std::numeric_limits<double>::quiet_NaN();
  bool any_fail() const;
};

/// Least-squares slope of log y against t over points with y > floor.
double log_linear_rate(const std::vector<double>& t, const std::vector<double>& y, double floor = 0.0);

TrajectoryReport evaluate_all(const Trajectory& traj, const MonitorParams& params);

}  // namespace krf
