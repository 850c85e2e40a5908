#include "krflow/flow.hpp"
#include "krflow/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace krf {

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;

double rel_volume_error(const Grid& g, const Field& rho) {
  return std::abs(2.0 * std::numbers::pi * g.integrate(rho) - kFourPi) / kFourPi;
}

ConformalMetric metric_of(const GridPtr& grid, const Field& rho) {
  return ConformalMetric(grid, 0.5 * rho.log());
}

// u - a at area density rho. The potential source is exactly 2·flow_rhs, so a stage
// costs one log and one exp per node.
Field phi_rate(const Grid& g, const Field& rho, const Field& rhs) {
  const int n = g.size();
  Field u(n);
  u(0) = 0.0;
  double flux = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    flux += 2.0 * g.weights()(j) * rhs(j);
    u(j + 1) = u(j) + g.spacing() * flux / g.face_sin()(j);
  }
  const Field mass = rho * g.weights();
  const double shift = u.maxCoeff();
  const Field e = (shift - u).exp();
  const double c = std::log((e * mass).sum() / mass.sum()) - shift;
  u += c;
  const double a = (u * e * mass).sum() / (e * mass).sum();
  return u - a;
}

struct Vars {
  Field rho, phi;
};

void require_valid(const Grid& g, const Field& rho, double vol_tol) {
  if (!rho.allFinite() || rho.minCoeff() <= 0.0) throw StepReject("non-positive or non-finite area density");
  const double err = rel_volume_error(g, rho);
  if (err > vol_tol) {
    std::ostringstream os;
    os << "relative volume error " << err << " exceeds " << vol_tol;
    throw StepReject(os.str());
  }
}

Vars advance_rk4(const GridPtr& grid, const Vars& v, double dt) {
  const Grid& g = *grid;
  auto stage = [&](const Field& rho, Field& krho, Field& kphi) {
    if (!rho.allFinite() || rho.minCoeff() <= 0.0) throw StepReject("stage left the positive cone");
    krho = flow_rhs(g, rho);
    kphi = phi_rate(g, rho, krho);
  };
  Field r1, p1, r2, p2, r3, p3, r4, p4;
  stage(v.rho, r1, p1);
  stage(v.rho + 0.5 * dt * r1, r2, p2);
  stage(v.rho + 0.5 * dt * r2, r3, p3);
  stage(v.rho + dt * r3, r4, p4);
  return {v.rho + dt / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4),
          v.phi + dt / 6.0 * (p1 + 2.0 * p2 + 2.0 * p3 + p4)};
}

// linearized trapezoid rule on the diffusion, explicit reaction:
// (I - (dt/4)Δ₀ diag(1/ρ)) δ = dt·rhs(ρ)
Vars advance_semi_implicit(const GridPtr& grid, const Vars& v, double dt) {
  const Grid& g = *grid;
  const int n = g.size();
  const double h = g.spacing();
  const Field rhs = dt * flow_rhs(g, v.rho);
  const Field inv = v.rho.inverse();
  const Field k = (dt / 4.0) * g.face_sin() / h;
  Field lo = Field::Zero(n), di = Field::Ones(n), up = Field::Zero(n);
  for (int j = 0; j + 1 < n; ++j) {
    // flux k_j (x_{j+1}/ρ_{j+1} - x_j/ρ_j) leaves cell j+1 and enters cell j
    di(j) += k(j) * inv(j) / g.weights()(j);
    up(j) -= k(j) * inv(j + 1) / g.weights()(j);
    di(j + 1) += k(j) * inv(j + 1) / g.weights()(j + 1);
    lo(j + 1) -= k(j) * inv(j) / g.weights()(j + 1);
  }
  Field c(n), d(n), x(n);
  c(0) = up(0) / di(0);
  d(0) = rhs(0) / di(0);
  for (int j = 1; j < n; ++j) {
    const double piv = di(j) - lo(j) * c(j - 1);
    c(j) = up(j) / piv;
    d(j) = (rhs(j) - lo(j) * d(j - 1)) / piv;
  }
  x(n - 1) = d(n - 1);
  for (int j = n - 2; j >= 0; --j) x(j) = d(j) - c(j) * x(j + 1);
  Vars out{v.rho + x, v.phi};
  if (!out.rho.allFinite() || out.rho.minCoeff() <= 0.0) throw StepReject("semi-implicit step left the positive cone");
  out.phi += dt * phi_rate(g, out.rho, flow_rhs(g, out.rho));
  return out;
}

Vars advance(const GridPtr& grid, const Vars& v, double dt, const FlowConfig& cfg) {
  Vars out = cfg.scheme == Scheme::rk4 ? advance_rk4(grid, v, dt) : advance_semi_implicit(grid, v, dt);
  require_valid(*grid, out.rho, cfg.vol_tol);
  return out;
}

[[noreturn]] void rethrow_at(double t) {
  std::ostringstream os;
  os << "at t = " << t << ": ";
  try {
    throw;
  } catch (const VolumeMismatch& e) {
    throw VolumeMismatch(os.str() + e.what());
  } catch (const SolveFail& e) {
    throw SolveFail(os.str() + e.what());
  } catch (const BandAmbiguity& e) {
    throw BandAmbiguity(os.str() + e.what());
  } catch (const StepReject& e) {
    throw StepReject(os.str() + e.what());
  }
}
}  // namespace

Field flow_rhs(const Grid& grid, const Field& rho) {
  return rho - 1.0 + 0.5 * laplacian_fv(grid, rho.log());
}

double stable_dt(const ConformalMetric& metric, Scheme scheme) {
  const double h = metric.grid->spacing();
  const double base = h * h * metric.rho().minCoeff();
  return scheme == Scheme::rk4 ? 0.25 * base : 4.0 * base;
}

FlowState make_state(const GridPtr& grid, double t, double dt, const Field& rho, const Field& phi,
                     const FlowConfig& cfg) {
  FlowState s;
  s.t = t;
  s.dt = dt;
  s.metric = metric_of(grid, rho);
  s.u = solve_ricci_potential(s.metric, cfg.potential_tol);
  s.phi = phi;
  double delta = std::numeric_limits<double>::quiet_NaN();
  if (cfg.compute_spectrum) {
    auto spec = std::make_shared<Spectrum>(
        weighted_spectrum(s.metric, s.u.u, cfg.m_max, cfg.k_per_mode));
    const double tau = cfg.band_tol > 0.0 ? cfg.band_tol : default_band_tol(*grid);
    const LambdaSecond ls = lambda_second(*spec, tau);
    s.lambda_g = ls.lambda_g;
    s.holo_band = ls.holo_band;
    s.spectrum = std::move(spec);
    delta = s.lambda_g - 1.0;
  }
  s.funcs = compute_functionals(s.u.u, s.metric, delta);
  return s;
}

ConformalMetric advance_metric(const ConformalMetric& metric, double dt) {
  const Grid& g = *metric.grid;
  const Field rho = metric.rho();
  const Field k1 = flow_rhs(g, rho);
  const Field k2 = flow_rhs(g, rho + 0.5 * dt * k1);
  const Field k3 = flow_rhs(g, rho + 0.5 * dt * k2);
  const Field k4 = flow_rhs(g, rho + dt * k3);
  return metric_of(metric.grid, rho + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

FlowState step(const FlowState& state, double dt, const FlowConfig& cfg) {
  const GridPtr& grid = state.metric.grid;
  const Vars next = advance(grid, {state.metric.rho(), state.phi}, dt, cfg);
  return make_state(grid, state.t + dt, dt, next.rho, next.phi, cfg);
}

Trajectory run(const FlowConfig& cfg, const ConformalMetric& initial) {
  const GridPtr grid = initial.grid;
  const double V0 = volume(initial);
  if (std::abs(V0 - kFourPi) / kFourPi > cfg.vol_tol) {
    std::ostringstream os;
    os.precision(12);
    os << "initial volume " << V0 << " is not 4π; rescale the metric first";
    throw VolumeMismatch(os.str());
  }
  if (!(cfg.record_every > 0.0) || !(cfg.t_end >= 0.0))
    throw ConfigError("record_every must be positive and t_end nonnegative");

  const double dt_limit = stable_dt(initial, Scheme::rk4);
  if (cfg.scheme == Scheme::rk4 && cfg.dt_init > dt_limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt_init " << cfg.dt_init << " exceeds the explicit limit " << dt_limit;
    throw ConfigError(os.str());
  }
  double dt = cfg.dt_init > 0.0 ? cfg.dt_init : stable_dt(initial, cfg.scheme);
  long per_record = std::max(1L, long(std::ceil(cfg.record_every / dt - 1e-9)));
  dt = cfg.record_every / double(per_record);

  Trajectory traj;
  traj.dt_history.emplace_back(0.0, dt);
  Vars v{initial.rho(), Field::Zero(grid->size())};
  try {
    traj.states.push_back(make_state(grid, 0.0, dt, v.rho, v.phi, cfg));
  } catch (const Error&) {
    rethrow_at(0.0);
  }

  const long n_records = long(std::floor(cfg.t_end / cfg.record_every + 1e-9));
  for (long rec = 0; rec <= n_records; ++rec) {
    const FlowState& last = traj.states.back();
    if (last.funcs.c0_u_minus_a < cfg.converge_tol) {
      traj.converged = true;
      traj.converged_at = last.t;
      traj.events.push_back("converged at t = " + std::to_string(last.t));
      break;
    }
    if (rec == n_records) break;
    const double t0 = rec * cfg.record_every;
    long done = 0;
    try {
      while (done < per_record) {
        Vars next;
        try {
          next = advance(grid, v, dt, cfg);
        } catch (const StepReject& e) {
          if (per_record > (1L << 24)) throw;
          dt *= 0.5;
          per_record *= 2;
          done *= 2;
          const double t = t0 + done * dt;
          traj.dt_history.emplace_back(t, dt);
          traj.events.push_back("step rejected at t = " + std::to_string(t) + " (" + e.what() +
                                "), dt halved");
          continue;
        }
        if (cfg.project_volume) next.rho *= kFourPi / (2.0 * std::numbers::pi * grid->integrate(next.rho));
        v = std::move(next);
        ++done;
      }
      const double t = (rec + 1) * cfg.record_every;
      traj.states.push_back(make_state(grid, t, dt, v.rho, v.phi, cfg));
      const double class_res = check_kahler_class(traj.states.back(), traj.states.front());
      if (class_res > cfg.class_tol)
        traj.events.push_back("class residual " + std::to_string(class_res) + " above class_tol at t = " +
                              std::to_string(t));
    } catch (const Error&) {
      rethrow_at(t0 + done * dt);
    }
  }
  return traj;
}

double check_kahler_class(const FlowState& state, const FlowState& initial) {
  const Grid& g = *state.metric.grid;
  const Field lhs = state.metric.rho() - initial.metric.rho();
  return (lhs - 0.5 * laplacian_pointwise(g, state.phi)).abs().maxCoeff();
}

LogDet log_det_bookkeeping(const FlowState& state, const FlowState& initial) {
  LogDet out;
  out.F = 2.0 * (state.metric.w - initial.metric.w);
  const Field ut = solve_ricci_potential_trapezoid(state.metric).u;
  const Field u0 = solve_ricci_potential_trapezoid(initial.metric).u;
  const double V = volume(initial.metric);
  out.c_t = std::log(weighted_integral((-state.phi - u0).exp(), initial.metric) / V);
  out.residual = (out.F - (ut - u0 - state.phi - out.c_t)).abs().maxCoeff();
  return out;
}

}  // namespace krf
