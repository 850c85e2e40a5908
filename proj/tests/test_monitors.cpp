#include <doctest.h>

#include "krflow/errors.hpp"
#include "krflow/monitors.hpp"

#include <cmath>
#include <numbers>

using namespace krf;
using std::numbers::pi;

namespace {
const Trajectory& p2_run() {
  static const Trajectory traj = [] {
    const auto g = make_grid(128);
    Field w = 1e-2 * legendre_on_grid(*g, 2);
    w += 0.5 * std::log(4 * pi / volume(ConformalMetric(g, w)));
    FlowConfig c;
    c.t_end = 1.0;
    c.record_every = 0.05;
    c.band_tol = default_band_tol(*g);
    return run(c, ConformalMetric(g, w));
  }();
  return traj;
}
}  // namespace

TEST_CASE("judge never fails out of gate") {
  CHECK(judge(false, -10.0, 0.0) == Verdict::gate_not_met);
  CHECK(judge(true, -1.0, 0.5) == Verdict::fail);
  CHECK(judge(true, -0.1, 0.5) == Verdict::pass);
  CHECK(judge(true, NAN, 0.5) == Verdict::fail);
  CHECK(std::string(to_string(Verdict::report_only)) == "REPORT_ONLY");
}

TEST_CASE("log-linear rate of an exact exponential") {
  std::vector<double> t, y;
  for (int i = 0; i < 10; ++i) {
    t.push_back(0.1 * i);
    y.push_back(3.0 * std::exp(-2.5 * t.back()));
  }
  CHECK(log_linear_rate(t, y) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(std::isnan(log_linear_rate({0.0}, {1.0})));
}

TEST_CASE("Calabi energy vanishes on the round metric") {
  CHECK(calabi_energy(round_metric(make_grid(64))) < 1e-24);
}

TEST_CASE("weighted Poincaré holds and fails when δ′ is forced") {
  const auto& s = p2_run().states.front();
  CHECK(check_weighted_poincare(s, NAN).verdict == Verdict::pass);
  const auto bad = check_weighted_poincare(s, NAN, 10.0);
  CHECK(bad.verdict == Verdict::fail);
  CHECK(bad.margin < 0);
}

TEST_CASE("Y decays at least at rate δ′") {
  const auto r = check_Y_decay(p2_run());
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.get("fitted_rate") > 1.0);
}

TEST_CASE("c0 vs Y effective constant and its gate") {
  const auto& s = p2_run().states.front();
  const auto r = check_c0_vs_Y(s, 0.5);
  CHECK(r.verdict == Verdict::report_only);
  CHECK(r.get("K_eff") > 0.0);
  CHECK(r.get("K_eff") < 1.0);
  CHECK(check_c0_vs_Y(s, 1e-4).verdict == Verdict::gate_not_met);
}

TEST_CASE("C2 estimate stays positive") {
  const auto r = check_c2_estimate(p2_run());
  CHECK(r.verdict == Verdict::report_only);
  CHECK(r.get("trace_min") > 0.9);
}

TEST_CASE("eigenvalue derivative identity, and its forced failure") {
  CHECK(check_eigenvalue_derivative(p2_run()).verdict == Verdict::pass);
  CHECK(check_eigenvalue_derivative(p2_run(), {}, 2.0).verdict == Verdict::fail);
}

TEST_CASE("|∇u|² evolution and Z derivative") {
  CHECK(check_gradnorm_evolution(p2_run()).verdict == Verdict::pass);
  const auto z = check_Z_derivative(p2_run());
  CHECK(z.verdict == Verdict::pass);
  CHECK(z.get("C8_eff") > 0.0);
}

TEST_CASE("Bochner identity on the zonal branch only") {
  const auto& s = p2_run().states[3];
  CHECK(check_bochner(s, eigen_data(*s.spectrum, find_entry(*s.spectrum, 0, 2))).verdict == Verdict::pass);
  CHECK(check_bochner(s, eigen_data(*s.spectrum, find_entry(*s.spectrum, 1, 0))).verdict ==
        Verdict::gate_not_met);
}

TEST_CASE("bootstrap: passes by default, fails immediately at Φ₀ = 1.0001") {
  CHECK(bootstrap_tracker(p2_run(), 0.0, 2.0, NAN).verdict == Verdict::pass);
  const auto r = bootstrap_tracker(p2_run(), 0.0, 1.0001, NAN);
  CHECK(r.verdict == Verdict::fail);
  CHECK(r.get("T_exit_lo") == 0.0);
  CHECK(r.get("first_violation_t") == doctest::Approx(0.05));
  CHECK(r.get("violated_condition") == 1.0);
}

TEST_CASE("short-time suite gate") {
  const auto& traj = p2_run();
  const double eps = calabi_energy(traj.states[0].metric);
  CHECK(short_time_suite(traj, 0.5, eps, 0.1, NAN).verdict == Verdict::gate_not_met);
  const auto r = short_time_suite(traj, 2.0, eps, 0.1, NAN);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.get("t0") == doctest::Approx(0.1));
}

TEST_CASE("evaluate_all on a clean run") {
  const auto rep = evaluate_all(p2_run(), MonitorParams{});
  CHECK_FALSE(rep.any_fail());
  CHECK(rep.summary.size() == known_checks().size());
  for (const auto& c : rep.summary)
    if (!c.gate_satisfied) CHECK(c.verdict == Verdict::gate_not_met);
  CHECK(rep.decay_rate_u == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("evaluate_all honours the check list") {
  MonitorParams p;
  p.checks = {"Y_decay"};
  const auto rep = evaluate_all(p2_run(), p);
  REQUIRE(rep.summary.size() == 1);
  CHECK(rep.summary[0].check_id == "Y_decay");
}

TEST_CASE("post-Schwarz form of the Bochner inequality is -O(h²)") {
  double prev = 0.0;
  for (int n : {128, 256}) {
    const auto g = make_grid(n);
    Field w = 1e-2 * legendre_on_grid(*g, 2);
    w += 0.5 * std::log(4 * pi / volume(ConformalMetric(g, w)));
    FlowConfig c;
    c.t_end = 0.0;
    c.band_tol = default_band_tol(*g);
    const auto s = run(c, ConformalMetric(g, w)).states[0];
    const double m = check_bochner(s, eigen_data(*s.spectrum, find_entry(*s.spectrum, 0, 2))).get("schwarz_margin");
    if (prev < 0) CHECK(prev / m == doctest::Approx(4.0).epsilon(0.1));
    prev = m;
  }
  CHECK(prev < 0.0);
}
