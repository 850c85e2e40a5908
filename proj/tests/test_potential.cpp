#include <doctest.h>

#include "krflow/errors.hpp"
#include "krflow/potential.hpp"

#include <cmath>
#include <numbers>

using namespace krf;
using std::numbers::pi;

namespace {
ConformalMetric bump(const GridPtr& g, double eps, int l = 2) {
  Field w = eps * legendre_on_grid(*g, l);
  const ConformalMetric m(g, w);
  w += 0.5 * std::log(4 * pi / volume(m));
  return ConformalMetric(g, w);
}
}  // namespace

TEST_CASE("round metric has zero potential") {
  const auto g = make_grid(64);
  const auto u = solve_ricci_potential(round_metric(g));
  CHECK(u.u.abs().maxCoeff() < 1e-13);
  CHECK(u.norm_residual < 1e-13);
}

TEST_CASE("linearized potential of a P2 bump is (4/3)εP2") {
  const double eps = 1e-3;
  const auto g = make_grid(256);
  const auto u = solve_ricci_potential(bump(g, eps));
  const Field lin = (4.0 / 3.0) * eps * legendre_on_grid(*g, 2);
  CHECK((u.u - lin).abs().maxCoeff() < 2e-6);
  CHECK(u.pde_residual < 1e-10);
}

TEST_CASE("normalization: (1/V)∫e^{-u}dv = 1") {
  const auto g = make_grid(128);
  const auto m = bump(g, 0.2, 3);
  const auto u = solve_ricci_potential(m);
  CHECK(weighted_integral((-u.u).exp(), m) / (4 * pi) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("trapezoid route agrees to O(h²)") {
  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    const auto g = make_grid(n);
    const auto m = bump(g, 0.05);
    const double d = (solve_ricci_potential(m).u - solve_ricci_potential_trapezoid(m).u).abs().maxCoeff();
    if (prev > 0) CHECK(prev / d == doctest::Approx(4.0).epsilon(0.2));
    prev = d;
  }
}

TEST_CASE("volume off 4π is rejected") {
  const auto g = make_grid(64);
  const ConformalMetric m(g, Field::Constant(64, 0.01));
  CHECK_THROWS_AS(solve_ricci_potential(m), VolumeMismatch);
}

TEST_CASE("delta_prime") {
  CHECK(delta_prime(0.5, 1.0) == doctest::Approx(0.098475).epsilon(1e-5));
  CHECK(delta_prime(0.0, 3.0) == 0.0);
  CHECK_THROWS_AS(delta_prime(-0.1, 1.0), DomainError);
  CHECK_THROWS_AS(delta_prime(0.1, NAN), DomainError);
}

TEST_CASE("Y of a small P2 bump") {
  // u - a ≈ (4/3)εP2, (1/V)∫P2² dv = 1/5
  const double eps = 1e-3;
  const auto g = make_grid(256);
  const auto m = bump(g, eps);
  const auto u = solve_ricci_potential(m);
  const auto f = compute_functionals(u.u, m, 2.0);
  CHECK(f.Y == doctest::Approx(16.0 / 45.0 * eps * eps).epsilon(5e-3));
  CHECK(f.c0_u_minus_a == doctest::Approx(4.0 / 3.0 * eps).epsilon(5e-3));
  CHECK(f.osc_u == doctest::Approx(2.0 * eps).epsilon(5e-3));
  CHECK(!std::isnan(f.delta_prime_0));
}

TEST_CASE("Futaki integrals vanish") {
  for (int n : {128, 256}) {
    const auto g = make_grid(n);
    const double h = pi / n;
    const auto m = bump(g, 0.1);
    const auto F = futaki_integrals(solve_ricci_potential(m).u, m);
    CHECK(F[0] == 0.0);
    CHECK(std::abs(F[1]) < 10 * h * h);
    CHECK(std::abs(F[2]) < 10 * h * h);
  }
}

TEST_CASE("complex laplacian of cosθ on the round sphere") {
  // ½Δ₀cosθ = -cosθ
  const auto g = make_grid(256);
  const Field r = complex_laplacian(g->cos_theta(), round_metric(g)) + g->cos_theta();
  CHECK(r.abs().maxCoeff() < 1e-4);
}

TEST_CASE("Hessian norms: cosθ is holomorphy potential on the round sphere") {
  // ∇∇ cosθ = 0, |∇∇̄cosθ|² = cos²θ
  const auto g = make_grid(256);
  const auto H = complex_hessian_norms(g->cos_theta(), round_metric(g));
  CHECK(H.pure.abs().maxCoeff() < 1e-3);
  CHECK((H.mixed - g->cos_theta().square()).abs().maxCoeff() < 1e-3);
}
