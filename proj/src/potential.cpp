#include "krflow/potential.hpp"
#include "krflow/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace krf {

namespace {
constexpr double kFourPi = 4.0 * std::numbers::pi;

void check_class(const ConformalMetric& metric, double tol) {
  const double V = volume(metric);
  if (std::abs(V - kFourPi) > 10.0 * tol * kFourPi) {
    std::ostringstream os;
    os.precision(12);
    os << "volume " << V << " differs from 4π; metric left the normalized class";
    throw VolumeMismatch(os.str());
  }
}

// adds the constant fixing (1/V)∫e^{-u}dv = 1
double normalize(Field& u, const ConformalMetric& metric, double& residual) {
  const double V = volume(metric);
  const double shift = u.maxCoeff();
  const double m = weighted_integral((shift - u).exp(), metric) / V;
  const double c = std::log(m) - shift;
  if (!std::isfinite(c)) throw NormalizationFail("normalization constant is not finite");
  u += c;
  residual = std::abs(weighted_integral((-u).exp(), metric) / V - 1.0);
  return c;
}
}  // namespace

RicciPotential solve_ricci_potential(const ConformalMetric& metric, double tol) {
  check_class(metric, tol);
  const Grid& g = *metric.grid;
  const int n = g.size();
  const Field rhs = 2.0 * (metric.rho() - 1.0 + laplacian_fv(g, metric.w));

  RicciPotential out;
  out.u.resize(n);
  out.u(0) = 0.0;
  double flux = 0.0;
  for (int j = 0; j + 1 < n; ++j) {
    flux += g.weights()(j) * rhs(j);
    out.u(j + 1) = out.u(j) + g.spacing() * flux / g.face_sin()(j);
  }
  out.norm_const = normalize(out.u, metric, out.norm_residual);
  out.pde_residual = (laplacian_fv(g, out.u) - rhs).abs().maxCoeff();
  return out;
}

RicciPotential solve_ricci_potential_trapezoid(const ConformalMetric& metric) {
  const Grid& g = *metric.grid;
  const int n = g.size();
  const Field& th = g.theta();
  const Field r = 2.0 * (metric.rho() - 1.0 + laplacian_pointwise(g, metric.w)) * g.sin_theta();

  // G(θ) = ∫ r sinθ, from the north pole on the upper half and from the south on the lower
  Field G(n);
  G(0) = 0.5 * th(0) * r(0);
  for (int j = 1; j < n; ++j) G(j) = G(j - 1) + 0.5 * (th(j) - th(j - 1)) * (r(j) + r(j - 1));
  Field Gs(n);
  Gs(n - 1) = -0.5 * th(0) * r(n - 1);
  for (int j = n - 2; j >= 0; --j) Gs(j) = Gs(j + 1) - 0.5 * (th(j + 1) - th(j)) * (r(j) + r(j + 1));
  for (int j = n / 2; j < n; ++j) G(j) = Gs(j);

  // sinθ u' = G
  const Field du = G / g.sin_theta();
  RicciPotential out;
  out.u.resize(n);
  out.u(0) = 0.0;
  for (int j = 1; j < n; ++j) out.u(j) = out.u(j - 1) + 0.5 * g.spacing() * (du(j) + du(j - 1));
  out.norm_const = normalize(out.u, metric, out.norm_residual);
  out.pde_residual = (laplacian_pointwise(g, out.u) * g.sin_theta() - r).abs().maxCoeff();
  return out;
}

double average_a(const Field& u, const ConformalMetric& metric) {
  return weighted_integral(u, metric, (-u).exp()) / volume(metric);
}

double functional_Y(const Field& u, double a, const ConformalMetric& metric) {
  return weighted_integral((u - a).square(), metric, (-u).exp()) / volume(metric);
}

double functional_Z(const Field& u, const ConformalMetric& metric) {
  return weighted_integral(grad_norm_sq(u, metric), metric, (-u).exp()) / volume(metric);
}

double delta_prime(double a, double s) {
  if (a < 0.0 || s < 0.0 || std::isnan(a) || std::isnan(s))
    throw DomainError("delta_prime: arguments must be nonnegative");
  const double es = std::exp(s);
  return a / (1.0 + es + a * es);
}

FunctionalBundle compute_functionals(const Field& u, const ConformalMetric& metric, double delta) {
  FunctionalBundle b;
  b.a = average_a(u, metric);
  b.Y = functional_Y(u, b.a, metric);
  b.Z = functional_Z(u, metric);
  b.osc_u = u.maxCoeff() - u.minCoeff();
  b.c0_u_minus_a = (u - b.a).abs().maxCoeff();
  b.grad_u_c0 = std::sqrt(grad_norm_sq(u, metric).maxCoeff());
  if (!std::isnan(delta)) b.delta_prime_0 = delta_prime(std::max(delta, 0.0), b.osc_u);
  return b;
}

std::array<double, 3> futaki_integrals(const Field& u, const ConformalMetric& metric) {
  const Grid& g = *metric.grid;
  const Field u_th = d_theta(g, u);
  std::array<double, 3> fut{};
  // the rotation field ∂_φ annihilates every axisymmetric u
  fut[0] = 0.0;
  // −sinθ∂_θ, real part of z∂_z
  fut[1] = weighted_integral(-g.sin_theta() * u_th, metric);
  // gradient of sinθcosφ: X(u) = cosθ cosφ u_θ, integrated over φ by the periodic rule
  constexpr int kAzimuth = 64;
  double az = 0.0;
  for (int k = 0; k < kAzimuth; ++k) az += std::cos(2.0 * std::numbers::pi * k / kAzimuth);
  az /= kAzimuth;
  fut[2] = az * weighted_integral(g.cos_theta() * u_th, metric);
  return fut;
}

Field complex_laplacian(const Field& f, const ConformalMetric& metric) {
  return 0.5 * (-2.0 * metric.w).exp() * laplacian_pointwise(*metric.grid, f);
}

HessianNorms complex_hessian_norms(const Field& u, const ConformalMetric& metric) {
  const Grid& g = *metric.grid;
  const Field u_th = d_theta(g, u);
  const Field w_th = d_theta(g, metric.w);
  const Field A = d2_theta(g, u) - (2.0 * w_th + g.cot_theta()) * u_th;
  HessianNorms out;
  out.mixed = complex_laplacian(u, metric).square();
  out.pure = 0.25 * (-4.0 * metric.w).exp() * A.square();
  return out;
}

}  // namespace krf
