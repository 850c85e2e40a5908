#include "krflow/harness.hpp"
#include "krflow/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace krf {

namespace fs = std::filesystem;

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

ConformalMetric rescaled(const GridPtr& grid, Field w) {
  const ConformalMetric m(grid, w);
  w += 0.5 * std::log(kFourPi / volume(m));
  return ConformalMetric(grid, std::move(w));
}

// whitespace or comma separated numeric table
std::vector<std::vector<double>> read_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read custom_w file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream in(line);
    std::vector<double> row;
    std::string tok;
    while (in >> tok) {
      char* end = nullptr;
      const double x = std::strtod(tok.c_str(), &end);
      if (*end != '\0') throw ConfigError(path + ": bad number '" + tok + "'", n);
      row.push_back(x);
    }
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows[0].size())
      throw ConfigError(path + ": ragged column count", n);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows[0].size() > 2) throw ConfigError(path + ": expected one or two columns");
  return rows;
}

Field custom_profile(const std::string& path, const Grid& g) {
  const auto rows = read_table(path);
  const int n = g.size();
  Field w(n);
  if (rows[0].size() == 1) {
    if (int(rows.size()) != n)
      throw ConfigError(path + ": " + std::to_string(rows.size()) + " values for a grid of " + std::to_string(n));
    for (int j = 0; j < n; ++j) w(j) = rows[j][0];
    return w;
  }
  // (θ, w) pairs, linear in θ, constant past the ends
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r[0], r[1]);
  std::sort(pts.begin(), pts.end());
  for (int j = 0; j < n; ++j) {
    const double th = g.theta()(j);
    auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(th, -HUGE_VAL));
    if (it == pts.begin()) w(j) = pts.front().second;
    else if (it == pts.end()) w(j) = pts.back().second;
    else {
      const auto& [t1, w1] = *it;
      const auto& [t0, w0] = *(it - 1);
      w(j) = t1 > t0 ? w0 + (w1 - w0) * (th - t0) / (t1 - t0) : w1;
    }
  }
  return w;
}

int worker_count(int configured) {
  if (const char* env = std::getenv("KRFLOW_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1, configured);
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) return exit_usage;
  return exit_numerical;
}

std::string error_text(const std::exception& e) {
  const char* kind = dynamic_cast<const ConfigError*>(&e)       ? "ConfigError"
                     : dynamic_cast<const VolumeMismatch*>(&e)    ? "VolumeMismatch"
                     : dynamic_cast<const NormalizationFail*>(&e) ? "NormalizationFail"
                     : dynamic_cast<const SolveFail*>(&e)         ? "SolveFail"
                     : dynamic_cast<const BandAmbiguity*>(&e)     ? "BandAmbiguity"
                     : dynamic_cast<const StepReject*>(&e)        ? "StepReject"
                     : dynamic_cast<const BranchCrossing*>(&e)    ? "BranchCrossing"
                     : dynamic_cast<const DomainError*>(&e)       ? "DomainError"
                                                                  : "Error";
  return std::string(kind) + ": " + e.what();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << text;
}

}  // namespace

const char* version() { return KRFLOW_VERSION; }

ConformalMetric initial_metric(const Scenario& sc, const GridPtr& grid) {
  const Grid& g = *grid;
  Field w = Field::Zero(g.size());
  switch (sc.kind) {
    case ScenarioKind::round: break;
    case ScenarioKind::legendre_bump: w = sc.epsilon * legendre_on_grid(g, sc.l); break;
    case ScenarioKind::multi_mode: {
      std::mt19937_64 gen(sc.seed);
      for (int l = 2; l <= 6; ++l) {
        const double r = double(gen() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        w += sc.amplitude * r * std::pow(double(l), -sc.decay_rate) * legendre_on_grid(g, l);
      }
      break;
    }
    case ScenarioKind::custom_w: w = custom_profile(sc.file, g); break;
  }
  return sc.rescales() ? rescaled(grid, std::move(w)) : ConformalMetric(grid, std::move(w));
}

double amplitude_for_calabi(const Scenario& scenario, const GridPtr& grid, double target) {
  if (!(target > 0)) throw std::invalid_argument("Calabi target must be positive");
  if (scenario.kind != ScenarioKind::legendre_bump && scenario.kind != ScenarioKind::multi_mode)
    throw ConfigError("Calabi targeting needs legendre_bump or multi_mode");
  auto energy = [&](double amp) {
    Scenario s = scenario;
    s.epsilon = s.amplitude = amp;
    return calabi_energy(initial_metric(s, grid));
  };
  double lo = 1e-4, hi = 1e-4;
  while (energy(lo) > target) {
    lo *= 0.1;
    if (lo < 1e-300) throw DomainError("Calabi target below resolution");
  }
  while (energy(hi) < target) {
    hi *= 2.0;
    if (hi > 10.0) throw DomainError("Calabi target " + short_num(target) + " not reachable");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-14; ++it) {
    const double mid = std::sqrt(lo * hi);
    (energy(mid) < target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

void write_timeseries(const Trajectory& traj, const std::string& path) {
  std::ostringstream os;
  os << "# krflow timeseries schema 1\n"
        "t,dt,volume,diam,K_min,K_max,a,Y,Z,osc_u,c0_u_minus_a,grad_u_c0,lambda_g,holo_band_min,"
        "holo_band_max,class_residual,phi_c0\n";
  for (const auto& s : traj.states) {
    const auto [kmin, kmax] = curvature_bounds(s.metric);
    double bmin = kNaN, bmax = kNaN;
    if (!s.holo_band.empty()) {
      bmin = *std::min_element(s.holo_band.begin(), s.holo_band.end());
      bmax = *std::max_element(s.holo_band.begin(), s.holo_band.end());
    }
    const double cols[] = {s.t,
                           s.dt,
                           volume(s.metric),
                           diameter(s.metric),
                           kmin,
                           kmax,
                           s.funcs.a,
                           s.funcs.Y,
                           s.funcs.Z,
                           s.funcs.osc_u,
                           s.funcs.c0_u_minus_a,
                           s.funcs.grad_u_c0,
                           s.lambda_g,
                           bmin,
                           bmax,
                           check_kahler_class(s, traj.states.front()),
                           s.phi.abs().maxCoeff()};
    for (size_t i = 0; i < std::size(cols); ++i) os << (i ? "," : "") << num(cols[i]);
    os << "\n";
  }
  write_file(path, os.str());
}

std::string format_report(const ExperimentSpec& spec, const Trajectory* traj, const TrajectoryReport* rep,
                          const std::string& error) {
  const std::string spec_text = to_text(spec);
  std::ostringstream os;
  os << "[provenance]\n"
     << "version = " << version() << "\n"
     << "spec_hash = " << fnv1a_hex(spec_text) << "\n"
     << "grid_n = " << spec.grid_n << "\n"
     << "h = " << num(std::numbers::pi / spec.grid_n) << "\n"
     << "timeseries_schema = 1\n";
  if (traj) {
    os << "states = " << traj->states.size() << "\n";
    os << "dt_history =";
    for (const auto& [t, dt] : traj->dt_history) os << " " << short_num(t) << ":" << num(dt);
    os << "\n";
    os << "converged = " << (traj->converged ? "true" : "false") << "\n";
    if (traj->converged) os << "converged_at = " << num(traj->converged_at) << "\n";
  }
  os << "status = " << (error.empty() ? "ok" : "error") << "\n";
  if (!error.empty()) os << "error = " << error << "\n";

  os << "\n[spec]\n" << spec_text;

  if (rep) {
    os << "\n[rates]\n"
       << "decay_rate_u = " << num(rep->decay_rate_u) << "\n"
       << "decay_rate_Y = " << num(rep->decay_rate_Y) << "\n";
    for (const auto& c : rep->summary) {
      os << "\n[check " << c.check_id << "]\n"
         << "anchor = " << c.anchor << "\n"
         << "verdict = " << to_string(c.verdict) << "\n"
         << "gate = " << (c.gate_satisfied ? "true" : "false") << "\n"
         << "margin = " << num(c.margin) << "\n"
         << "tolerance = " << num(c.tolerance) << "\n";
      for (const auto& [k, v] : c.aux) os << "aux." << k << " = " << num(v) << "\n";
      if (!c.note.empty()) os << "note = " << c.note << "\n";
    }
    // per-state values, keyed by state index so each reported number has a source row
    if (traj) {
      for (const auto& [id, pts] : rep->series) {
        os << "\n[series " << id << "]\n";
        size_t i = 0;
        for (const auto& [t, v] : pts) {
          while (i < traj->states.size() && traj->states[i].t < t) ++i;
          os << i << "," << num(t) << "," << num(v) << "\n";
        }
      }
    }
  }
  const std::vector<std::string>* run_events = traj ? &traj->events : nullptr;
  if ((run_events && !run_events->empty()) || (rep && !rep->events.empty())) {
    os << "\n[events]\n";
    if (run_events)
      for (const auto& e : *run_events) os << e << "\n";
    if (rep)
      for (const auto& e : rep->events) os << e << "\n";
  }
  return os.str();
}

RunArtifacts run_scenario(const ExperimentSpec& spec, const std::string& out_dir) {
  RunArtifacts out;
  try {
    const GridPtr grid = make_grid(spec.grid_n);
    FlowConfig cfg = spec.flow;
    if (cfg.band_tol <= 0.0) cfg.band_tol = default_band_tol(*grid);
    out.trajectory = run(cfg, initial_metric(spec.scenario, grid));
    out.report = evaluate_all(*out.trajectory, spec.monitors);
    out.exit_code = out.report->any_fail() ? exit_fail : exit_ok;
  } catch (const std::exception& e) {
    out.error = error_text(e);
    out.exit_code = classify(e);
    out.report.reset();
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    if (out.trajectory) {
      out.timeseries_path = (fs::path(out_dir) / "timeseries.csv").string();
      write_timeseries(*out.trajectory, out.timeseries_path);
    }
    out.report_path = (fs::path(out_dir) / "report.txt").string();
    write_file(out.report_path,
               format_report(spec, out.trajectory ? &*out.trajectory : nullptr, out.report ? &*out.report : nullptr,
                             out.error));
  }
  return out;
}

SweepResult sweep_epsilon(const ExperimentSpec& spec, const std::string& out_dir) {
  if (spec.sweep.empty()) throw ConfigError("sweep list is empty");
  if (spec.scenario.kind != ScenarioKind::legendre_bump && spec.scenario.kind != ScenarioKind::multi_mode)
    throw ConfigError("sweeps need legendre_bump or multi_mode");

  const size_t n = spec.sweep.size();
  SweepResult res;
  res.points.resize(n);
  std::vector<int> codes(n, exit_ok);
  std::atomic<size_t> next{0};

  auto work = [&] {
    for (size_t i = next++; i < n; i = next++) {
      SweepPoint& p = res.points[i];
      p.epsilon = spec.sweep[i];
      ExperimentSpec one = spec;
      one.sweep.clear();
      char name[32];
      std::snprintf(name, sizeof name, "point_%02zu", i);
      const std::string dir = out_dir.empty() ? "" : (fs::path(out_dir) / name).string();
      try {
        double amp = p.epsilon;
        if (spec.sweep_target == SweepTarget::calabi)
          amp = amplitude_for_calabi(spec.scenario, make_grid(spec.grid_n), p.epsilon);
        one.scenario.epsilon = one.scenario.amplitude = amp;
        p.amplitude = amp;
      } catch (const std::exception& e) {
        p.status = error_text(e);
        codes[i] = classify(e);
        continue;
      }
      const RunArtifacts art = run_scenario(one, dir);
      codes[i] = art.exit_code;
      if (!art.error.empty()) {
        p.status = art.error;
        continue;
      }
      p.status = "ok";
      p.epsilon_calabi = calabi_energy(art.trajectory->states.front().metric);
      p.grad_u_t0 = p.ratio = p.K_eff = p.C_eff = kNaN;
      for (const auto& c : art.report->summary) {
        if (c.check_id == "short_time") {
          p.grad_u_t0 = c.get("grad_u_c0_t0");
          p.ratio = c.get("scaling_ratio");
        } else if (c.check_id == "c0_vs_Y") {
          p.K_eff = c.get("K_eff_t0");
        } else if (c.check_id == "gradient_estimate") {
          p.C_eff = c.get("C_eff_max");
        }
      }
    }
  };
  const int nw = std::min<int>(worker_count(spec.workers), int(n));
  std::vector<std::thread> pool;
  for (int k = 1; k < nw; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // log‖∇u‖(t₀) against log ε_Calabi over the good points
  std::vector<double> x, y, ratios;
  for (const auto& p : res.points) {
    if (p.status != "ok") {
      ++res.failures;
      continue;
    }
    if (p.ratio > 0) ratios.push_back(p.ratio);
    if (p.grad_u_t0 > 0 && p.epsilon_calabi > 0) {
      x.push_back(std::log(p.epsilon_calabi));
      y.push_back(std::log(p.grad_u_t0));
    }
  }
  if (!ratios.empty())
    res.ratio_spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
  if (x.size() >= 2) {
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx > 0) {
      res.slope = sxy / sxx;
      res.intercept = my - res.slope * mx;
    }
  }
  res.exit_code = res.failures > 0 ? exit_numerical
                  : std::count(codes.begin(), codes.end(), int(exit_fail)) ? exit_fail
                                                                           : exit_ok;

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ostringstream csv;
    csv << "epsilon,amplitude,epsilon_calabi,grad_u_t0,ratio,K_eff,C_eff,status\n";
    for (const auto& p : res.points) {
      std::string st = p.status;
      std::replace(st.begin(), st.end(), ',', ';');
      csv << num(p.epsilon) << "," << num(p.amplitude) << "," << num(p.epsilon_calabi) << "," << num(p.grad_u_t0)
          << "," << num(p.ratio) << "," << num(p.K_eff) << "," << num(p.C_eff) << "," << st << "\n";
    }
    write_file((fs::path(out_dir) / "sweep.csv").string(), csv.str());

    std::ostringstream rep;
    rep << "[provenance]\nversion = " << version() << "\nspec_hash = " << fnv1a_hex(to_text(spec))
        << "\npoints = " << n << "\nfailures = " << res.failures << "\n"
        << "\n[spec]\n" << to_text(spec) << "\n[regression]\n";
    if (x.size() >= 2)
      rep << "slope = " << num(res.slope) << "\nintercept = " << num(res.intercept) << "\n";
    else
      rep << "note = fewer than two good points, regression skipped\n";
    rep << "ratio_spread = " << num(res.ratio_spread) << "\n";
    auto spread = [&](double SweepPoint::*f) {
      double lo = INFINITY, hi = 0;
      for (const auto& p : res.points)
        if (p.status == "ok" && p.*f > 0) lo = std::min(lo, p.*f), hi = std::max(hi, p.*f);
      return hi > 0 ? hi / lo : kNaN;
    };
    rep << "K_eff_spread = " << num(spread(&SweepPoint::K_eff)) << "\n"
        << "C_eff_spread = " << num(spread(&SweepPoint::C_eff)) << "\n";
    write_file((fs::path(out_dir) / "sweep_report.txt").string(), rep.str());
  }
  return res;
}

}  // namespace krf
