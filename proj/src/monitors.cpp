#include "krflow/monitors.hpp"
#include "krflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace krf {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// derivative at the middle of three (possibly unevenly spaced) samples
template <typename T>
T fd3(double t0, double t1, double t2, const T& f0, const T& f1, const T& f2) {
  const double h1 = t1 - t0, h2 = t2 - t1;
  return (-h2 / (h1 * (h1 + h2))) * f0 + ((h2 - h1) / (h1 * h2)) * f1 +
         (h1 / (h2 * (h1 + h2))) * f2;
}

double mean_weighted(const Field& f, const FlowState& s) {
  return weighted_integral(f, s.metric, (-s.u.u).exp()) / volume(s.metric);
}

CheckReport make(const std::string& id, const std::string& anchor) {
  CheckReport r;
  r.check_id = id;
  r.anchor = anchor;
  return r;
}

// eigenvalue of the tracked branch, or NaN when the state has no spectrum
double branch_value(const FlowState& s, Branch b) {
  if (!s.spectrum) return kNaN;
  return s.spectrum->entries[find_entry(*s.spectrum, b.mode, b.index)].value;
}
}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::gate_not_met: return "GATE_NOT_MET";
    case Verdict::report_only: return "REPORT_ONLY";
  }
  return "?";
}

double CheckReport::get(const std::string& key) const {
  for (const auto& [k, v] : aux)
    if (k == key) return v;
  return kNaN;
}

void CheckReport::set(const std::string& key, double value) {
  for (auto& [k, v] : aux)
    if (k == key) {
      v = value;
      return;
    }
  aux.emplace_back(key, value);
}

Verdict judge(bool gate, double margin, double tolerance) {
  if (!gate) return Verdict::gate_not_met;
  return margin < -tolerance || std::isnan(margin) ? Verdict::fail : Verdict::pass;
}

double calabi_energy(const ConformalMetric& metric) {
  return weighted_integral((gaussian_curvature(metric) - 1.0).square(), metric) / volume(metric);
}

double log_linear_rate(const std::vector<double>& t, const std::vector<double>& y, double floor) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(y[i] > floor)) continue;
    const double ly = std::log(y[i]);
    n += 1;
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  if (n < 2) return kNaN;
  const double den = n * stt - st * st;
  if (den == 0.0) return kNaN;
  return -(n * sty - st * sy) / den;
}

CheckReport check_weighted_poincare(const FlowState& state, double delta_measured,
                                    std::optional<double> delta_prime_override) {
  CheckReport r = make("weighted_poincare", "Lemma 2.1 (RPP)");
  r.tolerance = 1e-8;
  const double lam = state.lambda_g;
  if (std::isnan(lam) && !delta_prime_override) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "no spectrum on this state";
    return r;
  }
  double dp;
  if (delta_prime_override) {
    dp = *delta_prime_override;
  } else {
    const double delta = std::isnan(delta_measured) ? lam - 1.0 : std::min(delta_measured, lam - 1.0);
    dp = delta_prime(std::max(delta, 0.0), state.funcs.osc_u);
  }
  r.margin = state.funcs.Z - (1.0 + dp) * state.funcs.Y;
  r.set("delta_prime", dp);
  r.set("Z", state.funcs.Z);
  r.set("Y", state.funcs.Y);
  r.verdict = judge(true, r.margin, r.tolerance);
  return r;
}

CheckReport check_Y_decay(const Trajectory& traj) {
  CheckReport r = make("Y_decay", "Lemma 2.2");
  const auto& S = traj.states;
  if (S.empty() || std::isnan(S[0].funcs.delta_prime_0)) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "no measured delta'";
    return r;
  }
  // maximal gated prefix with a uniform δ′
  double dp = kInf;
  size_t end = 0;
  for (; end < S.size(); ++end) {
    const double cand = std::min(dp, S[end].funcs.delta_prime_0);
    if (!(S[end].funcs.c0_u_minus_a <= std::min(0.25, cand / 8.0))) break;
    dp = cand;
  }
  if (end == 0) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "gate fails at t = 0";
    return r;
  }
  const double Y0 = S[0].funcs.Y;
  r.tolerance = 1e-10 * Y0;
  r.margin = kInf;
  std::vector<double> t, y;
  for (size_t i = 0; i < end; ++i) {
    r.margin = std::min(r.margin, std::exp(-dp * S[i].t) * Y0 - S[i].funcs.Y);
    t.push_back(S[i].t);
    y.push_back(S[i].funcs.Y);
  }
  double ineq = -kInf, ineq_rel = -kInf;
  for (size_t i = 1; i + 1 < end; ++i) {
    const double dY = fd3(S[i - 1].t, S[i].t, S[i + 1].t, S[i - 1].funcs.Y, S[i].funcs.Y, S[i + 1].funcs.Y);
    const double c = S[i].funcs.c0_u_minus_a;
    const double res = dY - ((-2.0 + 2.0 * c) * (1.0 + dp) + (2.0 + c)) * S[i].funcs.Y;
    ineq = std::max(ineq, res);
    if (S[i].funcs.Y > 0) ineq_rel = std::max(ineq_rel, res / S[i].funcs.Y);
  }
  r.set("delta_prime", dp);
  r.set("gated_until", S[end - 1].t);
  r.set("fitted_rate", log_linear_rate(t, y, 1e-28));
  r.set("ineq_residual", ineq);
  r.set("ineq_residual_rel", ineq_rel);
  r.verdict = judge(true, r.margin, r.tolerance);
  return r;
}

CheckReport check_c0_vs_Y(const FlowState& state, double rho) {
  CheckReport r = make("c0_vs_Y", "Lemma 2.3");
  const auto& f = state.funcs;
  r.gate_satisfied = f.grad_u_c0 <= 1.0 && f.c0_u_minus_a <= 2.0 * rho;
  r.set("grad_u_c0", f.grad_u_c0);
  r.set("c0_u_minus_a", f.c0_u_minus_a);
  if (!r.gate_satisfied) {
    r.verdict = Verdict::gate_not_met;
    return r;
  }
  r.verdict = Verdict::report_only;
  if (!(f.Y > 1e-30)) {
    r.note = "skipped (Y = 0)";
    r.set("K_eff", kNaN);
    return r;
  }
  const double kappa = noncollapsing_kappa(state.metric, rho);
  r.set("kappa", kappa);
  r.set("K_eff", f.c0_u_minus_a * std::pow(kappa, 0.25) * std::pow(f.Y, -0.25));
  return r;
}

CheckReport check_c2_estimate(const Trajectory& traj) {
  CheckReport r = make("c2_estimate", "Lemma 2.4");
  const auto& S = traj.states;
  if (S.empty()) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    return r;
  }
  const ConformalMetric& g0 = S[0].metric;
  const Grid& g = *g0.grid;
  const Field e0 = (-2.0 * g0.w).exp();
  const double u0 = S[0].u.u.abs().maxCoeff();
  double tmin = kInf, tmax = -kInf, pmax = 1.0, alpha = 0.0, prev = 0.0;
  bool monotone = true;
  for (const auto& s : S) {
    const Field trace = 1.0 + 0.5 * e0 * laplacian_pointwise(g, s.phi);
    tmin = std::min(tmin, trace.minCoeff());
    tmax = std::max(tmax, trace.maxCoeff());
    const Field d = 2.0 * (s.metric.w - g0.w);
    const double phi_meas = std::exp(d.abs().maxCoeff());
    if (phi_meas < prev - 1e-12) monotone = false;
    prev = phi_meas;
    pmax = std::max(pmax, phi_meas);
    alpha = std::max(alpha, s.phi.abs().maxCoeff() + u0 + s.u.u.abs().maxCoeff());
  }
  r.margin = tmin;
  r.set("trace_min", tmin);
  r.set("trace_max", tmax);
  r.set("phi_meas_max", pmax);
  r.set("phi_meas_final", prev);
  r.set("phi_meas_monotone", monotone ? 1.0 : 0.0);
  r.set("alpha_final", alpha);
  r.verdict = tmin > 0.0 ? Verdict::report_only : Verdict::fail;
  if (tmin <= 0.0) r.note = "g(t) not positive relative to g0";
  return r;
}

EigenDerivativeSample eigenvalue_derivative_at(const Trajectory& traj, int i, Branch branch,
                                               double psi_scale) {
  const auto& S = traj.states;
  const FlowState& s = S.at(i);
  if (!s.spectrum) throw std::invalid_argument("state has no spectrum");
  const auto& spec = *s.spectrum;
  const EigenData eig = eigen_data(spec, find_entry(spec, branch.mode, branch.index));
  const Field psi = psi_scale * eig.psi;
  const Field gb = psi_scale * psi_scale * eig.grad_bar_sq;
  const Field one_minus_K = 1.0 - gaussian_curvature(s.metric);
  const Field uma = s.u.u - s.funcs.a;
  EigenDerivativeSample out;
  out.t = s.t;
  out.formula = mean_weighted(-one_minus_K * gb + (eig.lambda * psi.square() - gb) * uma, s);
  out.fd = fd3(S.at(i - 1).t, s.t, S.at(i + 1).t, branch_value(S[i - 1], branch),
               branch_value(s, branch), branch_value(S[i + 1], branch));
  out.rel = std::abs(out.fd - out.formula) / (std::abs(out.fd) + 1e-8);
  return out;
}

CheckReport check_eigenvalue_derivative(const Trajectory& traj, Branch branch, double psi_scale) {
  CheckReport r = make("eigenvalue_derivative", "Claim 2.8, dλ/dt identity");
  r.tolerance = 1e-2;
  const auto& S = traj.states;
  if (S.size() < 3 || !S[0].spectrum) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "needs three states with spectra";
    return r;
  }
  double worst = 0.0, worst_t = 0.0;
  for (size_t i = 0; i < S.size(); ++i) {
    const auto modes = S[i].spectrum->mode(branch.mode);
    const double guard = 10.0 * default_band_tol(*S[i].metric.grid);
    const double v = modes.at(branch.index)->value;
    for (int nb : {branch.index - 1, branch.index + 1})
      if (nb >= 0 && nb < int(modes.size()) && std::abs(modes[nb]->value - v) < guard) {
        std::ostringstream os;
        os << "branch (m=" << branch.mode << ", k=" << branch.index << ") meets a neighbour at t = "
           << S[i].t;
        throw BranchCrossing(os.str());
      }
  }
  for (int i = 1; i + 1 < int(S.size()); ++i) {
    const auto smp = eigenvalue_derivative_at(traj, i, branch, psi_scale);
    if (smp.rel > worst) {
      worst = smp.rel;
      worst_t = smp.t;
    }
  }
  r.margin = r.tolerance - worst;
  r.set("max_rel_mismatch", worst);
  r.set("at_t", worst_t);
  r.set("mode", branch.mode);
  r.set("index", branch.index);
  r.verdict = judge(true, r.margin, 0.0);
  return r;
}

GradnormSample gradnorm_sample_at(const Trajectory& traj, int i) {
  const auto& S = traj.states;
  const FlowState& s = S.at(i);
  auto G = [&](int k) { return grad_norm_sq(S.at(k).u.u, S[k].metric); };
  const Field G1 = G(i), Gm = G(i - 1), Gp = G(i + 1);
  const Field d3 = fd3(S[i - 1].t, s.t, S[i + 1].t, Gm, G1, Gp);
  Field dG = d3;
  GradnormSample out{0.0, 0.0};
  const int n = int(S.size());
  const double step = s.t - S[i - 1].t;
  const bool uniform = i >= 2 && i + 2 < n &&
                       std::abs(S[i + 2].t - S[i - 2].t - 4.0 * step) < 1e-9 * step &&
                       std::abs(S[i + 1].t - s.t - step) < 1e-9 * step;
  if (uniform) {
    dG = (G(i - 2) - 8.0 * Gm + 8.0 * Gp - G(i + 2)) / (12.0 * step);
    out.fd_spread = (dG - d3).abs().maxCoeff();
  }
  const HessianNorms H = complex_hessian_norms(s.u.u, s.metric);
  const Field rhs = complex_laplacian(G1, s.metric) - H.pure - H.mixed + G1;
  out.residual = (dG - rhs).abs().maxCoeff();
  return out;
}

double gradnorm_residual_at(const Trajectory& traj, int i) { return gradnorm_sample_at(traj, i).residual; }

CheckReport check_gradnorm_evolution(const Trajectory& traj) {
  CheckReport r = make("gradnorm_evolution", "|∇u|² evolution");
  const auto& S = traj.states;
  if (S.size() < 3) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "needs three states";
    return r;
  }
  double res = 0.0, scale = 0.0, spread = 0.0;
  const int edge = S.size() >= 5 ? 2 : 1;
  for (int i = edge; i + edge < int(S.size()); ++i) {
    const auto smp = gradnorm_sample_at(traj, i);
    res = std::max(res, smp.residual);
    spread = std::max(spread, smp.fd_spread);
    scale = std::max(scale, grad_norm_sq(S[i].u.u, S[i].metric).maxCoeff());
  }
  const double h = S[0].metric.grid->spacing();
  const double rel = scale > 0 ? res / scale : 0.0;
  r.set("residual", res);
  r.set("residual_rel", rel);
  // amplitude bound on [0, 2]
  const double g0 = S[0].funcs.grad_u_c0;
  double amp = 0.0;
  for (const auto& s : S)
    if (s.t <= 2.0 + 1e-12 && g0 > 0) amp = std::max(amp, s.funcs.grad_u_c0 / (std::exp(1.0) * g0));
  r.set("amplitude_ratio", amp);
  // spatial allowance plus the time-difference uncertainty (three- vs five-point) of the records
  const double fd_rel = scale > 0 ? spread / scale : 0.0;
  r.set("time_fd_spread_rel", fd_rel);
  r.tolerance = 100.0 * h * h + fd_rel;
  r.margin = std::min(r.tolerance - rel, 1.0 - amp);
  r.verdict = judge(true, r.margin, 0.0);
  return r;
}

CheckReport check_Z_derivative(const Trajectory& traj) {
  CheckReport r = make("Z_derivative", "Claim 2.8, dZ/dt bound");
  const auto& S = traj.states;
  if (S.size() < 3) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "needs three states";
    return r;
  }
  std::vector<double> H(S.size());
  for (size_t i = 0; i < S.size(); ++i)
    H[i] = mean_weighted(complex_hessian_norms(S[i].u.u, S[i].metric).mixed, S[i]);

  double margin = kInf;
  int gated = 0;
  for (size_t i = 1; i + 1 < S.size(); ++i) {
    const auto& f = S[i].funcs;
    const double dp = std::isnan(f.delta_prime_0) ? 0.0 : f.delta_prime_0;
    const bool gate = 1.5 * f.grad_u_c0 * f.grad_u_c0 + f.c0_u_minus_a <= 1.0 &&
                      f.c0_u_minus_a <= std::min(0.25, dp / 8.0);
    if (!gate) continue;
    ++gated;
    const double dZ = fd3(S[i - 1].t, S[i].t, S[i + 1].t, S[i - 1].funcs.Z, f.Z, S[i + 1].funcs.Z);
    margin = std::min(margin, 2.0 * f.Z - 0.5 * H[i] - dZ);
  }
  // space-time integral of |∇∇̄u|² over unit windows
  const double eps = S[0].funcs.grad_u_c0;
  const double dp0 = std::isnan(S[0].funcs.delta_prime_0) ? 0.0 : S[0].funcs.delta_prime_0;
  double total = 0.0, c8 = 0.0;
  for (size_t i = 0; i + 1 < S.size(); ++i) total += 0.5 * (S[i + 1].t - S[i].t) * (H[i] + H[i + 1]);
  for (size_t i = 0; i < S.size(); ++i) {
    double win = 0.0;
    for (size_t j = i; j + 1 < S.size() && S[j + 1].t <= S[i].t + 1.0 + 1e-12; ++j)
      win += 0.5 * (S[j + 1].t - S[j].t) * (H[j] + H[j + 1]);
    if (eps > 0) c8 = std::max(c8, win / (std::exp(-dp0 * S[i].t / 2.0) * eps));
  }
  r.set("hessian_spacetime_integral", total);
  r.set("C8_eff", c8);
  r.set("gated_states", gated);
  if (gated == 0) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "small-data regime never reached";
    return r;
  }
  r.tolerance = 1e-6 * std::max(S[0].funcs.Z, 1e-300);
  r.margin = margin;
  r.verdict = judge(true, r.margin, r.tolerance);
  return r;
}

BochnerTerms bochner_terms(const FlowState& state, const EigenData& eig) {
  const ConformalMetric& m = state.metric;
  const Grid& g = *m.grid;
  const Field& psi = eig.psi;
  const Field e2 = (-2.0 * m.w).exp();
  const Field p1 = d_theta(g, psi);
  const Field A = d2_theta(g, psi) - (2.0 * d_theta(g, m.w) + g.cot_theta()) * p1;
  const Field u1 = d_theta(g, state.u.u);
  BochnerTerms b;
  b.f = 0.5 * e2 * p1.square();
  b.lhs = complex_laplacian(b.f, m);
  b.hess_pure = 0.25 * e2 * e2 * A.square();
  b.hess_mixed = (0.5 * e2 * laplacian_pointwise(g, psi)).square();
  b.zeroth = (1.0 - 2.0 * eig.lambda) * b.f;
  b.ricci_potential = complex_laplacian(state.u.u, m) * b.f;
  b.mixed_third = 0.5 * e2 * e2 * A * u1 * p1;
  b.grad_u_sq = grad_norm_sq(state.u.u, m);
  return b;
}

CheckReport check_bochner(const FlowState& state, const EigenData& eig) {
  CheckReport r = make("bochner", "Appendix, Bochner formula for |∇̄ψ|²");
  if (eig.mode != 0) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "identity evaluated for real (m = 0) eigenfunctions only";
    return r;
  }
  const BochnerTerms b = bochner_terms(state, eig);
  const Field rhs = b.hess_pure + b.hess_mixed + b.zeroth + b.ricci_potential + b.mixed_third;
  const double res = (b.lhs - rhs).abs().maxCoeff();
  const double scale = std::max({b.lhs.abs().maxCoeff(), b.hess_pure.abs().maxCoeff(),
                                 b.hess_mixed.abs().maxCoeff(), b.zeroth.abs().maxCoeff(), 1e-300});
  const Field schwarz = 0.5 * b.hess_pure + b.hess_mixed +
                        (1.0 - 2.0 * eig.lambda - b.grad_u_sq) * b.f + b.ricci_potential;
  const double h = state.metric.grid->spacing();
  r.set("residual", res);
  r.set("residual_rel", res / scale);
  r.set("schwarz_margin", (b.lhs - schwarz).minCoeff());
  r.set("lambda", eig.lambda);
  r.tolerance = 100.0 * h * h;
  r.margin = r.tolerance - res / scale;
  r.verdict = judge(true, r.margin, 0.0);
  return r;
}

CheckReport check_gradient_estimate(const FlowState& state, const EigenData& eig, double c_s) {
  CheckReport r = make("gradient_estimate", "Theorem 5.1 (GA)");
  if (!(eig.lambda > 0.0)) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    r.note = "needs λ > 0";
    return r;
  }
  const double sup = std::sqrt(eig.grad_bar_sq.maxCoeff());
  const double g2 = state.funcs.grad_u_c0 * state.funcs.grad_u_c0;
  const double pre = std::exp(0.5 * state.u.u.maxCoeff()) * std::sqrt(eig.lambda);
  r.set("sup_grad_bar_psi", sup);
  r.set("C_s", c_s);
  r.set("C_eff", sup / (pre * c_s * (g2 + eig.lambda)));
  r.set("C_eff_literal_n1", sup / (pre * std::sqrt(c_s * (g2 + eig.lambda))));
  r.verdict = Verdict::report_only;
  return r;
}

CheckReport bootstrap_tracker(const Trajectory& traj, double L, double phi0, double delta) {
  CheckReport r = make("bootstrap", "Claims 2.6-2.7");
  const auto& S = traj.states;
  if (S.empty()) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    return r;
  }
  const double eps = S[0].funcs.grad_u_c0;
  if (L <= 0.0) L = eps > 0 ? phi0 / std::sqrt(eps) : 0.0;
  if (std::isnan(delta)) delta = S[0].lambda_g - 1.0;
  const double tol = 1e-12;
  double first = kNaN, first_strong = kNaN, margin = kInf, last_good = kNaN;
  int which = -1;
  for (const auto& s : S) {
    const Field d = 2.0 * (s.metric.w - S[0].metric.w);
    const double rmin = std::exp(d.minCoeff()), rmax = std::exp(d.maxCoeff());
    const double bound = L * eps;
    const double slack[3] = {bound - s.funcs.grad_u_c0,
                             std::min(rmin - 1.0 / phi0, phi0 - rmax),
                             std::isnan(s.lambda_g) ? kInf : s.lambda_g - 1.0 - 0.5 * delta};
    for (int k = 0; k < 3; ++k) {
      margin = std::min(margin, slack[k]);
      if (slack[k] < -tol && std::isnan(first)) {
        first = s.t;
        which = k;
      }
    }
    if (std::isnan(first)) last_good = s.t;
    const bool strong = s.funcs.grad_u_c0 <= 0.5 * bound + tol && rmin >= 2.0 / phi0 - tol &&
                        rmax <= 0.5 * phi0 + tol &&
                        (std::isnan(s.lambda_g) || s.lambda_g >= 1.0 + 2.0 * delta / 3.0 - tol);
    if (!strong && std::isnan(first_strong)) first_strong = s.t;
  }
  r.margin = margin;
  r.set("L", L);
  r.set("epsilon", eps);
  r.set("phi0", phi0);
  r.set("delta", delta);
  r.set("first_violation_t", first);
  // the exit time T of the conditions lies in (T_exit_lo, first_violation_t]
  r.set("T_exit_lo", std::isnan(first) ? kNaN : last_good);
  r.set("violated_condition", which);
  r.set("strengthened_holds", std::isnan(first_strong) ? 1.0 : 0.0);
  r.set("strengthened_first_violation_t", first_strong);
  r.verdict = std::isnan(first) ? Verdict::pass : Verdict::fail;
  if (which >= 0) {
    static const char* names[3] = {"gradient bound", "metric equivalence", "eigenvalue floor"};
    r.note = std::string(names[which]) + " violated";
  }
  return r;
}

CheckReport short_time_suite(const Trajectory& traj, double Lambda, double eps_calabi, double t0,
                             double delta) {
  CheckReport r = make("short_time", "Section 3 short-time estimates");
  const auto& S = traj.states;
  if (S.empty()) {
    r.gate_satisfied = false;
    r.verdict = Verdict::gate_not_met;
    return r;
  }
  auto maxK = [](const FlowState& s) {
    const auto [lo, hi] = curvature_bounds(s.metric);
    return std::max(std::abs(lo), std::abs(hi));
  };
  const double K0 = maxK(S[0]);
  if (std::isnan(delta)) delta = S[0].lambda_g - 1.0;
  double exceed = kNaN, lam_min = kInf;
  const FlowState* at_t0 = &S[0];
  for (const auto& s : S) {
    if (std::isnan(exceed) && maxK(s) > 2.0 * Lambda) exceed = s.t;
    if (s.t <= t0 + 1e-12) {
      if (!std::isnan(s.lambda_g)) lam_min = std::min(lam_min, s.lambda_g);
      at_t0 = &s;
    }
  }
  const double g = at_t0->funcs.grad_u_c0;
  r.set("max_abs_K0", K0);
  r.set("first_exceed_t", exceed);
  r.set("lambda_min_to_t0", lam_min);
  r.set("eigen_dip_margin", lam_min - 1.0 - 0.5 * delta);
  r.set("epsilon_calabi", eps_calabi);
  r.set("t0", at_t0->t);
  r.set("grad_u_c0_t0", g);
  r.set("scaling_ratio", eps_calabi > 0 ? g / std::pow(eps_calabi, 0.25) : kNaN);
  r.gate_satisfied = Lambda >= K0;
  if (!r.gate_satisfied) {
    r.verdict = Verdict::gate_not_met;
    r.note = "Λ below max|K(0)|";
    return r;
  }
  const bool early_exceed = !std::isnan(exceed) && exceed <= 0.0;
  r.margin = std::min(lam_min - 1.0 - 0.5 * delta, early_exceed ? -1.0 : kInf);
  r.verdict = judge(true, r.margin, 0.0);
  return r;
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> ids = {
      "weighted_poincare", "Y_decay",   "c0_vs_Y",           "c2_estimate",
      "eigenvalue_derivative", "gradnorm_evolution", "Z_derivative", "bochner",
      "gradient_estimate", "bootstrap", "short_time"};
  return ids;
}

bool TrajectoryReport::any_fail() const {
  for (const auto& c : summary)
    if (c.verdict == Verdict::fail) return true;
  return false;
}

TrajectoryReport evaluate_all(const Trajectory& traj, const MonitorParams& p) {
  TrajectoryReport rep;
  const auto& S = traj.states;
  auto on = [&](const std::string& id) {
    return p.checks.empty() || std::find(p.checks.begin(), p.checks.end(), id) != p.checks.end();
  };
  const bool spectra = !S.empty() && S[0].spectrum != nullptr;

  if (on("weighted_poincare")) {
    CheckReport agg = make("weighted_poincare", "Lemma 2.1 (RPP)");
    agg.tolerance = 1e-8;
    agg.margin = kInf;
    agg.gate_satisfied = false;
    bool failed = false;
    for (const auto& s : S) {
      const auto c = check_weighted_poincare(s, p.delta);
      if (!c.gate_satisfied) continue;
      agg.gate_satisfied = true;
      agg.margin = std::min(agg.margin, c.margin);
      failed = failed || c.verdict == Verdict::fail;
      rep.series["weighted_poincare"].emplace_back(s.t, c.margin);
    }
    agg.verdict = !agg.gate_satisfied ? Verdict::gate_not_met : failed ? Verdict::fail : Verdict::pass;
    rep.summary.push_back(agg);
  }
  if (on("Y_decay")) rep.summary.push_back(check_Y_decay(traj));
  if (on("c0_vs_Y")) {
    CheckReport agg = make("c0_vs_Y", "Lemma 2.3");
    double kmin = kInf, kmax = 0.0;
    int gated = 0;
    for (const auto& s : S) {
      const auto c = check_c0_vs_Y(s, p.rho);
      if (!c.gate_satisfied) continue;
      ++gated;
      const double k = c.get("K_eff");
      if (std::isnan(k)) continue;
      kmin = std::min(kmin, k);
      kmax = std::max(kmax, k);
      rep.series["c0_vs_Y"].emplace_back(s.t, k);
    }
    agg.gate_satisfied = gated > 0;
    agg.verdict = gated > 0 ? Verdict::report_only : Verdict::gate_not_met;
    agg.set("gated_states", gated);
    agg.set("K_eff_min", kmax > 0 ? kmin : kNaN);
    agg.set("K_eff_max", kmax > 0 ? kmax : kNaN);
    if (!S.empty()) agg.set("K_eff_t0", check_c0_vs_Y(S[0], p.rho).get("K_eff"));
    rep.summary.push_back(agg);
  }
  if (on("c2_estimate")) rep.summary.push_back(check_c2_estimate(traj));
  if (on("eigenvalue_derivative") && spectra) {
    try {
      rep.summary.push_back(check_eigenvalue_derivative(traj, p.branch));
    } catch (const BranchCrossing& e) {
      CheckReport c = make("eigenvalue_derivative", "Claim 2.8, dλ/dt identity");
      c.gate_satisfied = false;
      c.verdict = Verdict::gate_not_met;
      c.note = e.what();
      rep.summary.push_back(c);
    }
  }
  if (on("gradnorm_evolution")) rep.summary.push_back(check_gradnorm_evolution(traj));
  if (on("Z_derivative")) rep.summary.push_back(check_Z_derivative(traj));
  if ((on("bochner") || on("gradient_estimate")) && spectra) {
    CheckReport bo = make("bochner", "Appendix, Bochner formula for |∇̄ψ|²");
    CheckReport ge = make("gradient_estimate", "Theorem 5.1 (GA)");
    double worst = 0.0, tol = 0.0, schwarz = kInf, cmin = kInf, cmax = 0.0;
    bool gate = false;
    for (const auto& s : S) {
      const EigenData eig = eigen_data(*s.spectrum, find_entry(*s.spectrum, p.branch.mode, p.branch.index));
      const auto b = check_bochner(s, eig);
      if (b.gate_satisfied) {
        gate = true;
        worst = std::max(worst, b.get("residual_rel"));
        schwarz = std::min(schwarz, b.get("schwarz_margin"));
        tol = b.tolerance;
        rep.series["bochner"].emplace_back(s.t, b.get("residual_rel"));
      }
      const auto g = check_gradient_estimate(s, eig, sobolev_constant_estimate(s.metric));
      const double c = g.get("C_eff");
      if (!std::isnan(c)) {
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        rep.series["gradient_estimate"].emplace_back(s.t, c);
      }
    }
    bo.gate_satisfied = gate;
    bo.tolerance = tol;
    bo.margin = tol - worst;
    bo.set("residual_rel_max", worst);
    bo.set("schwarz_margin_min", schwarz);
    bo.verdict = gate ? judge(true, bo.margin, 0.0) : Verdict::gate_not_met;
    ge.set("C_eff_min", cmin);
    ge.set("C_eff_max", cmax);
    ge.verdict = Verdict::report_only;
    if (on("bochner")) rep.summary.push_back(bo);
    if (on("gradient_estimate")) rep.summary.push_back(ge);
  }
  if (on("bootstrap")) rep.summary.push_back(bootstrap_tracker(traj, p.L, p.phi0, p.delta));
  if (on("short_time") && !S.empty()) {
    const auto [lo, hi] = curvature_bounds(S[0].metric);
    const double Lambda = std::isnan(p.Lambda) ? std::max(std::abs(lo), std::abs(hi)) : p.Lambda;
    rep.summary.push_back(short_time_suite(traj, Lambda, calabi_energy(S[0].metric), p.t0, p.delta));
  }

  // gate transitions of the Y-decay hypothesis
  bool prev = true;
  for (const auto& s : S) {
    const double dp = std::isnan(s.funcs.delta_prime_0) ? 0.0 : s.funcs.delta_prime_0;
    const bool g = s.funcs.c0_u_minus_a <= std::min(0.25, dp / 8.0);
    if (g != prev) {
      std::ostringstream os;
      os << "t = " << s.t << ": Y-decay gate " << (g ? "entered" : "left");
      rep.events.push_back(os.str());
    }
    prev = g;
  }

  std::vector<double> t, c0, Y;
  for (size_t i = S.size() / 2; i < S.size(); ++i) {
    t.push_back(S[i].t);
    c0.push_back(S[i].funcs.c0_u_minus_a);
    Y.push_back(S[i].funcs.Y);
  }
  rep.decay_rate_u = log_linear_rate(t, c0, 1e-11);
  rep.decay_rate_Y = log_linear_rate(t, Y, 1e-24);
  return rep;
}

}  // namespace krf
