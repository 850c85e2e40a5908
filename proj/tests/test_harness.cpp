#include <doctest.h>

#include "krflow/errors.hpp"
#include "krflow/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace krf;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("krflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentSpec small(const std::string& extra) {
  return parse_spec("grid_n = 64\n" + extra);
}
}  // namespace

TEST_CASE("scenario presets") {
  const auto g = make_grid(128);
  Scenario sc;
  sc.kind = ScenarioKind::round;
  CHECK(initial_metric(sc, g).w.abs().maxCoeff() < 1e-15);

  sc.kind = ScenarioKind::legendre_bump;
  sc.epsilon = 0.1;
  CHECK(volume(initial_metric(sc, g)) == doctest::Approx(4 * pi).epsilon(1e-14));
  sc.rescale_volume = 0;
  CHECK(volume(initial_metric(sc, g)) != doctest::Approx(4 * pi).epsilon(1e-6));

  Scenario mm;
  mm.kind = ScenarioKind::multi_mode;
  const Field a = initial_metric(mm, g).w;
  CHECK((a - initial_metric(mm, g).w).abs().maxCoeff() == 0.0);
  mm.seed = 2;
  CHECK((a - initial_metric(mm, g).w).abs().maxCoeff() > 1e-6);
  CHECK(a.abs().maxCoeff() < 5 * mm.amplitude);
}

TEST_CASE("custom profiles") {
  const auto dir = scratch("custom");
  const auto g = make_grid(64);
  {
    std::ofstream f(dir / "two.dat");
    f << "# theta w\n0 0.0\n" << pi << " 0.0\n";
  }
  Scenario sc;
  sc.kind = ScenarioKind::custom_w;
  sc.file = (dir / "two.dat").string();
  CHECK(initial_metric(sc, g).w.abs().maxCoeff() == 0.0);
  {
    std::ofstream f(dir / "short.dat");
    f << "0.1\n0.2\n";
  }
  sc.file = (dir / "short.dat").string();
  CHECK_THROWS_AS(initial_metric(sc, g), ConfigError);
  sc.file = (dir / "missing.dat").string();
  CHECK_THROWS_AS(initial_metric(sc, g), ConfigError);
}

TEST_CASE("Calabi-targeted amplitude") {
  const auto g = make_grid(128);
  Scenario sc;
  for (double target : {1e-6, 1e-3}) {
    sc.epsilon = amplitude_for_calabi(sc, g, target);
    CHECK(calabi_energy(initial_metric(sc, g)) == doctest::Approx(target).epsilon(1e-9));
  }
}

TEST_CASE("round scenario: clean verdicts, converged at t = 0, artifacts written") {
  const auto dir = scratch("round");
  const auto art = run_scenario(small("scenario = round"), dir.string());
  CHECK(art.exit_code == exit_ok);
  REQUIRE(art.trajectory);
  CHECK(art.trajectory->converged);
  CHECK(art.trajectory->converged_at == 0.0);
  for (const auto& c : art.report->summary) CHECK(c.verdict != Verdict::fail);
  CHECK(fs::exists(art.timeseries_path));
  const std::string rep = slurp(art.report_path);
  CHECK(rep.find("[provenance]") != std::string::npos);
  CHECK(rep.find("spec_hash = ") != std::string::npos);
  CHECK(rep.find("[check bootstrap]") != std::string::npos);
}

TEST_CASE("the report echoes a spec that reproduces the run") {
  const auto dir = scratch("echo");
  const auto spec = small("scenario = legendre_bump(2, 1e-3)\n[flow]\nt_end = 0.2, record_every = 0.1");
  const auto art = run_scenario(spec, dir.string());
  const std::string rep = slurp(art.report_path);
  const auto b = rep.find("[spec]\n") + 7;
  const auto e = rep.find("\n[rates]");
  CHECK(parse_spec(rep.substr(b, e - b)) == spec);
}

TEST_CASE("timeseries schema and determinism") {
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  const auto spec = small("scenario = multi_mode(3, 2, 0.05)\n[flow]\nt_end = 0.3, record_every = 0.1");
  const auto a = run_scenario(spec, d1.string());
  const auto b = run_scenario(spec, d2.string());
  const std::string ta = slurp(a.timeseries_path);
  CHECK(ta == slurp(b.timeseries_path));
  std::istringstream in(ta);
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  CHECK(line ==
        "t,dt,volume,diam,K_min,K_max,a,Y,Z,osc_u,c0_u_minus_a,grad_u_c0,lambda_g,holo_band_min,holo_band_max,"
        "class_residual,phi_c0");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == int(a.trajectory->states.size()));
}

TEST_CASE("volume-violating custom profile is a numerical error") {
  const auto dir = scratch("badvol");
  {
    std::ofstream f(dir / "w.dat");
    f << "0 0.2\n" << pi << " 0.2\n";
  }
  const auto art = run_scenario(small("scenario = custom_w(" + (dir / "w.dat").string() + ")"), dir.string());
  CHECK(art.exit_code == exit_numerical);
  CHECK(art.error.find("VolumeMismatch") != std::string::npos);
  CHECK(slurp(art.report_path).find("VolumeMismatch") != std::string::npos);
}

TEST_CASE("bad dt is a usage error") {
  const auto art = run_scenario(small("scenario = round\n[flow]\ndt_init = 1"), "");
  CHECK(art.exit_code == exit_usage);
}

TEST_CASE("forced FAIL maps to exit 1") {
  const auto art = run_scenario(
      small("scenario = legendre_bump(2, 1e-2)\n[flow]\nt_end = 0.1, record_every = 0.05\n[monitors]\nPhi0 = 1.0001"),
      "");
  CHECK(art.exit_code == exit_fail);
}

TEST_CASE("sweep isolates a failing point") {
  const auto dir = scratch("sweep");
  auto spec = small(
      "scenario = legendre_bump(2, 1e-10), rescale_volume = false\n"
      "[flow]\nt_end = 0.1, record_every = 0.05\n"
      "[monitors]\nchecks = short_time, c0_vs_Y\n"
      "[sweep]\nepsilon = logspace(1e-10, 1e-9, 8)");
  spec.sweep.insert(spec.sweep.begin() + 4, 0.1);
  const auto res = sweep_epsilon(spec, dir.string());
  REQUIRE(res.points.size() == 9);
  CHECK(res.failures == 1);
  CHECK(res.points[4].status.find("VolumeMismatch") != std::string::npos);
  int ok = 0;
  for (const auto& p : res.points) ok += p.status == "ok";
  CHECK(ok == 8);
  CHECK(res.exit_code == exit_numerical);
  CHECK(std::isfinite(res.slope));
  CHECK(fs::exists(dir / "sweep.csv"));
  CHECK(fs::exists(dir / "point_08" / "report.txt"));
}

TEST_CASE("single-point sweep skips the regression") {
  const auto spec = small(
      "scenario = legendre_bump(2, 1e-3)\n[flow]\nt_end = 0.1, record_every = 0.05\n"
      "[monitors]\nchecks = short_time\n[sweep]\nepsilon = 1e-3");
  const auto res = sweep_epsilon(spec, "");
  CHECK(res.failures == 0);
  CHECK(std::isnan(res.slope));
  CHECK(res.ratio_spread == 1.0);
}

TEST_CASE("sweep needs a list") {
  CHECK_THROWS_AS(sweep_epsilon(small("scenario = legendre_bump(2, 1e-3)"), ""), ConfigError);
}
