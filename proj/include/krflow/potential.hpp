#pragma once

#include "krflow/geometry.hpp"

#include <array>
#include <limits>

namespace krf {

struct RicciPotential {
  Field u;
  double norm_const = 0.0;
  double pde_residual = 0.0;
  double norm_residual = 0.0;
};

/// Solves ½Δ₀u = e^{2w}(1 - K) with (1/V)∫e^{-u}dv = 1. Throws VolumeMismatch
/// when the metric is not in the normalized class.
RicciPotential solve_ricci_potential(const ConformalMetric& metric, double tol = 1e-10);

/// Same problem by nodal trapezoid quadrature and the pointwise Laplacian.
/// Shares no stencil with solve_ricci_potential, so the two differ by O(h²).
RicciPotential solve_ricci_potential_trapezoid(const ConformalMetric& metric);

double average_a(const Field& u, const ConformalMetric& metric);
double functional_Y(const Field& u, double a, const ConformalMetric& metric);
double functional_Z(const Field& u, const ConformalMetric& metric);

/// a / (1 + e^s + a e^s)
double delta_prime(double a, double s);

struct FunctionalBundle {
  double a = 0.0;
  double Y = 0.0;
  double Z = 0.0;
  double osc_u = 0.0;
  double c0_u_minus_a = 0.0;
  double grad_u_c0 = 0.0;
  double delta_prime_0 = std::numeric_limits<double>::quiet_NaN();
};

/// `delta` is the measured gap λ(g) - 1; leave NaN to skip δ′.
FunctionalBundle compute_functionals(const Field& u, const ConformalMetric& metric,
                                     double delta = std::numeric_limits<double>::quiet_NaN());

/// ∫X(u)dv for the rotation, the axial dilation and one non-axial l=1 gradient field.
std::array<double, 3> futaki_integrals(const Field& u, const ConformalMetric& metric);

struct HessianNorms {
  Field mixed;  // |∇∇̄u|²
  Field pure;   // |∇∇u|²
};

HessianNorms complex_hessian_norms(const Field& u, const ConformalMetric& metric);

/// ½e^{-2w}Δ₀f on the pointwise stencil.
Field complex_laplacian(const Field& f, const ConformalMetric& metric);

}  // namespace krf
