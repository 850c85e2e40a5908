#include <doctest.h>

#include "krflow/config.hpp"
#include "krflow/errors.hpp"

#include <cmath>

using namespace krf;

TEST_CASE("minimal file takes the documented defaults") {
  const auto s = parse_spec("scenario=round, grid_n=256");
  CHECK(s.scenario.kind == ScenarioKind::round);
  CHECK(s.grid_n == 256);
  const auto d = default_spec();
  CHECK(s.flow.t_end == d.flow.t_end);
  CHECK(s.flow.record_every == d.flow.record_every);
  CHECK(s.monitors.rho == 0.5);
  CHECK(s.monitors.checks.empty());
  CHECK(s.sweep.empty());
}

TEST_CASE("functional scenario forms") {
  auto s = parse_spec("scenario = legendre_bump(3, 2.5e-3)");
  CHECK(s.scenario.kind == ScenarioKind::legendre_bump);
  CHECK(s.scenario.l == 3);
  CHECK(s.scenario.epsilon == 2.5e-3);
  s = parse_spec("scenario = multi_mode(7, 1.5, 0.02)");
  CHECK(s.scenario.seed == 7);
  CHECK(s.scenario.decay_rate == 1.5);
  CHECK(s.scenario.amplitude == 0.02);
  s = parse_spec("scenario = custom_w(profile.dat)");
  CHECK(s.scenario.file == "profile.dat");
  CHECK_FALSE(s.scenario.rescales());
}

TEST_CASE("sections, comments and dotted keys") {
  const auto s = parse_spec(R"(
# comment
scenario = legendre_bump(2, 1e-2)   # trailing
[flow]
t_end = 2.5, scheme = semi_implicit
[monitors]
checks = Y_decay, bootstrap
Phi0 = 3
flow.m_max = 4
)");
  CHECK(s.flow.t_end == 2.5);
  CHECK(s.flow.scheme == Scheme::semi_implicit);
  CHECK(s.monitors.checks == std::vector<std::string>{"Y_decay", "bootstrap"});
  CHECK(s.monitors.phi0 == 3.0);
  CHECK(s.flow.m_max == 4);
}

TEST_CASE("log-spaced sweep list") {
  const auto s = parse_spec("[sweep]\nepsilon = logspace(1e-6, 1e-2, 9)");
  REQUIRE(s.sweep.size() == 9);
  CHECK(s.sweep.front() == doctest::Approx(1e-6));
  CHECK(s.sweep[2] == doctest::Approx(1e-5));
  CHECK(s.sweep.back() == doctest::Approx(1e-2));
  CHECK(parse_spec("[sweep]\nepsilon = 1e-3, 2e-3").sweep.size() == 2);
}

TEST_CASE("errors name the key and the line") {
  try {
    parse_spec("grid_n = 64\nbogus = 1\n");
    FAIL("no throw");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_spec("scenario = legendre_bump(1, 1e-3)"), ConfigError);
  CHECK_THROWS_AS(parse_spec("grid_n = 8"), ConfigError);
  CHECK_THROWS_AS(parse_spec("[monitors]\nchecks = nonsense"), ConfigError);
  CHECK_THROWS_AS(parse_spec("[flow]\nscheme = euler"), ConfigError);
  CHECK_THROWS_AS(parse_spec("[flow]\nt_end = abc"), ConfigError);
  CHECK_THROWS_AS(parse_spec("[nowhere]"), ConfigError);
  CHECK_THROWS_AS(parse_spec("scenario = sphere"), ConfigError);
  CHECK_THROWS_AS(parse_spec("[flow]\nm_max = 1"), ConfigError);
}

TEST_CASE("round trip through the canonical text") {
  auto s = parse_spec(R"(
scenario = multi_mode(11, 2.25, 0.0125), grid_n = 192
D = 4.5
[flow]
record_every = 0.1, dt_init = 1e-5, project_volume = false
[monitors]
delta = 0.3, Lambda = 1.7, checks = bochner
[sweep]
epsilon = logspace(1e-5, 1e-3, 5)
target = calabi
workers = 3
)");
  const auto back = parse_spec(to_text(s));
  CHECK(back == s);
  CHECK(to_text(back) == to_text(s));
  CHECK(back.sweep == s.sweep);
  CHECK(back.monitors.delta == 0.3);
  CHECK(std::isnan(parse_spec(to_text(default_spec())).D));
  CHECK(parse_spec(to_text(default_spec())) == default_spec());
}

TEST_CASE("spec hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex(to_text(default_spec())).size() == 16);
}
