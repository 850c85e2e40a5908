#include <doctest.h>

#include "krflow/errors.hpp"
#include "krflow/geometry.hpp"

#include <cmath>
#include <numbers>

using namespace krf;
using std::numbers::pi;

TEST_CASE("grid rejects tiny sizes") {
  CHECK_THROWS_AS(Grid(8), std::invalid_argument);
  CHECK_NOTHROW(Grid(16));
}

TEST_CASE("quadrature weights sum to 2") {
  for (int n : {16, 64, 257}) {
    const Grid g(n);
    CHECK(g.weights().sum() == doctest::Approx(2.0).epsilon(1e-13));
  }
}

TEST_CASE("legendre polynomials are orthogonal on the grid") {
  const Grid g(256);
  const Field p2 = legendre_on_grid(g, 2), p3 = legendre_on_grid(g, 3);
  CHECK(std::abs(g.integrate(p2 * p3)) < 1e-12);
  CHECK(g.integrate(p2 * p2) == doctest::Approx(2.0 / 5.0).epsilon(1e-4));
}

TEST_CASE("round metric: K = 1, V = 4π, diameter π") {
  const auto g = make_grid(128);
  const auto m = round_metric(g);
  CHECK((gaussian_curvature(m) - 1.0).abs().maxCoeff() < 1e-12);
  CHECK(volume(m) == doctest::Approx(4 * pi).epsilon(1e-14));
  CHECK(diameter(m) == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("curvature of w = ε cosθ matches the closed form") {
  // Δ₀cosθ = -2cosθ, so K = e^{-2ε cosθ}(1 + 2ε cosθ)
  const double eps = 0.05;
  double prev = 0.0;
  for (int n : {128, 256}) {
    const auto g = make_grid(n);
    const ConformalMetric m(g, eps * g->cos_theta());
    const Field exact = (-2 * eps * g->cos_theta()).exp() * (1 + 2 * eps * g->cos_theta());
    const double err = (gaussian_curvature(m) - exact).abs().maxCoeff();
    CHECK(err < 5e-4);
    if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.15));
    prev = err;
  }
}

TEST_CASE("volume of w = 0.1 P2") {
  const double oracle = 12.6176671437190102874986625099;
  const auto g = make_grid(512);
  const ConformalMetric m(g, 0.1 * legendre_on_grid(*g, 2));
  CHECK(volume(m) == doctest::Approx(oracle).epsilon(1e-5));
}

TEST_CASE("Gauss-Bonnet holds to rounding for any profile") {
  const auto g = make_grid(96);
  const Field w = 0.3 * legendre_on_grid(*g, 3) - 0.2 * legendre_on_grid(*g, 2) + 0.1;
  const ConformalMetric m(g, w);
  CHECK(weighted_integral(gaussian_curvature(m), m) == doctest::Approx(4 * pi).epsilon(1e-12));
}

TEST_CASE("finite-volume and pointwise Laplacians agree to O(h²)") {
  double prev = 0.0;
  for (int n : {128, 256, 512}) {
    const Grid g(n);
    const Field f = (0.7 * g.cos_theta()).exp();
    const double err = (laplacian_fv(g, f) - laplacian_pointwise(g, f)).abs().maxCoeff();
    if (prev > 0) CHECK(prev / err > 3.3);
    prev = err;
  }
}

TEST_CASE("gradient norm of P2") {
  // ½ (3 cosθ sinθ)², sup 9/8
  const auto g = make_grid(512);
  const Field q = grad_norm_sq(legendre_on_grid(*g, 2), round_metric(g));
  CHECK(q.maxCoeff() == doctest::Approx(1.125).epsilon(1e-4));
}

TEST_CASE("noncollapsing on the round sphere") {
  const auto g = make_grid(256);
  const auto m = round_metric(g);
  CHECK(noncollapsing_kappa(m, 1.0) == doctest::Approx(0.229848847065930141).epsilon(1e-6));
  CHECK(noncollapsing_kappa(m, 0.02) == doctest::Approx(0.25).epsilon(1e-3));
  CHECK_THROWS_AS(noncollapsing_kappa(m, 0.0), DomainError);
  CHECK_THROWS_AS(noncollapsing_kappa(m, 2.0), DomainError);
}

TEST_CASE("metric construction rejects non-finite w") {
  const auto g = make_grid(32);
  Field w = Field::Zero(32);
  w(3) = NAN;
  CHECK_THROWS_AS(ConformalMetric(g, w), DomainError);
}

TEST_CASE("smooth profiles are regular at the poles") {
  const auto g = make_grid(256);
  CHECK(pole_regularity_defect(ConformalMetric(g, 0.1 * legendre_on_grid(*g, 2))) < 1e-3);
  CHECK(pole_regularity_defect(ConformalMetric(g, 0.1 * g->theta())) > 0.05);
}

TEST_CASE("meridian length of the round sphere") {
  const auto g = make_grid(64);
  const Field s = meridian_arclength(round_metric(g));
  CHECK(s.size() == 65);
  CHECK(s(64) == doctest::Approx(pi).epsilon(1e-13));
}
