#include "krflow/geometry.hpp"
#include "krflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace krf {

namespace {
constexpr double kPi = std::numbers::pi;
}

ConformalMetric::ConformalMetric(GridPtr g, Field w_, int n)
    : grid(std::move(g)), w(std::move(w_)), complex_dim(n) {
  if (!grid) throw std::invalid_argument("ConformalMetric: null grid");
  if (w.size() != grid->size()) throw std::invalid_argument("ConformalMetric: size mismatch");
  if (!w.allFinite()) throw DomainError("ConformalMetric: non-finite conformal factor");
}

ConformalMetric round_metric(const GridPtr& grid) {
  return ConformalMetric(grid, Field::Zero(grid->size()));
}

Field laplacian_fv(const Grid& grid, const Field& f) {
  const int n = grid.size();
  const Field flux = grid.face_sin() * (f.tail(n - 1) - f.head(n - 1)) / grid.spacing();
  Field out = Field::Zero(n);
  out.head(n - 1) += flux;
  out.tail(n - 1) -= flux;
  return out / grid.weights();
}

namespace {
// f padded with one reflected ghost node at each end
Field padded(const Field& f, Parity parity) {
  const int n = f.size();
  const double s = parity == Parity::even ? 1.0 : -1.0;
  Field e(n + 2);
  e(0) = s * f(0);
  e.segment(1, n) = f;
  e(n + 1) = s * f(n - 1);
  return e;
}
}  // namespace

Field d_theta(const Grid& grid, const Field& f, Parity parity) {
  const int n = grid.size();
  const Field e = padded(f, parity);
  return (e.tail(n) - e.head(n)) / (2.0 * grid.spacing());
}

Field d2_theta(const Grid& grid, const Field& f, Parity parity) {
  const int n = grid.size();
  const Field e = padded(f, parity);
  const double h = grid.spacing();
  return (e.tail(n) - 2.0 * f + e.head(n)) / (h * h);
}

Field laplacian_pointwise(const Grid& grid, const Field& f) {
  return d2_theta(grid, f) + grid.cot_theta() * d_theta(grid, f);
}

Field gaussian_curvature(const ConformalMetric& metric) {
  return (-2.0 * metric.w).exp() * (1.0 - laplacian_fv(*metric.grid, metric.w));
}

double volume(const ConformalMetric& metric) {
  return 2.0 * kPi * metric.grid->integrate(metric.rho());
}

double diameter(const ConformalMetric& metric) {
  const Grid& g = *metric.grid;
  const Field ew = metric.w.exp();
  const double meridian = g.spacing() * ew.sum();
  const double latitude = kPi * (ew * g.sin_theta()).maxCoeff();
  return std::max(meridian, latitude);
}

double weighted_integral(const Field& f, const ConformalMetric& metric, const Field& weight) {
  const Grid& g = *metric.grid;
  if (weight.size() == 0) return 2.0 * kPi * (f * metric.rho() * g.weights()).sum();
  return 2.0 * kPi * (f * weight * metric.rho() * g.weights()).sum();
}

Field grad_norm_sq(const Field& f, const ConformalMetric& metric) {
  return 0.5 * (-2.0 * metric.w).exp() * d_theta(*metric.grid, f).square();
}

Field meridian_arclength(const ConformalMetric& metric) {
  const int n = metric.grid->size();
  Field s(n + 1);
  s(0) = 0.0;
  const Field ds = metric.grid->spacing() * metric.w.exp();
  for (int j = 0; j < n; ++j) s(j + 1) = s(j) + ds(j);
  return s;
}

namespace {
// Area of the geodesic ball of radius r about θ = 0; the conformal factor is
// piecewise constant per cell, so inside a cell the cap grows like 1 - cosθ.
double cap_area(const Field& faces_s, const Field& w, double h, double r) {
  const int n = w.size();
  double area = 0.0;
  for (int j = 0; j < n; ++j) {
    const double lo = j * h;
    if (r >= faces_s(j + 1)) {
      area += std::exp(2.0 * w(j)) * (std::cos(lo) - std::cos(lo + h));
      continue;
    }
    const double theta = lo + (r - faces_s(j)) * std::exp(-w(j));
    area += std::exp(2.0 * w(j)) * (std::cos(lo) - std::cos(theta));
    break;
  }
  return 2.0 * kPi * area;
}
}  // namespace

double noncollapsing_kappa(const ConformalMetric& metric, double rho) {
  const double diam = diameter(metric);
  if (!(rho > 0.0) || rho > 0.5 * diam)
    throw DomainError("noncollapsing_kappa: rho must lie in (0, diam/2]");
  const double V = volume(metric);
  const double h = metric.grid->spacing();
  const Field w_north = metric.w;
  const Field w_south = metric.w.reverse();
  const ConformalMetric south(metric.grid, w_south);
  const Field s_north = meridian_arclength(metric);
  const Field s_south = meridian_arclength(south);

  constexpr int kRadii = 64;
  const double r_lo = 1e-2 * rho;
  double kappa = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kRadii; ++i) {
    const double r = r_lo * std::pow(rho / r_lo, double(i) / (kRadii - 1));
    for (const auto* p : {&s_north, &s_south}) {
      const Field& w = (p == &s_north) ? w_north : w_south;
      kappa = std::min(kappa, cap_area(*p, w, h, r) / (V * r * r));
    }
  }
  return kappa;
}

std::pair<double, double> curvature_bounds(const ConformalMetric& metric) {
  const Field K = gaussian_curvature(metric);
  return {K.minCoeff(), K.maxCoeff()};
}

double pole_regularity_defect(const ConformalMetric& metric) {
  const Field& w = metric.w;
  const int n = w.size();
  const double h = metric.grid->spacing();
  // slopes at θ = h and 3h/2, extrapolated linearly to the pole
  const double north = (3.0 * (w(1) - w(0)) - (w(2) - w(0))) / h;
  const double south = (3.0 * (w(n - 2) - w(n - 1)) - (w(n - 3) - w(n - 1))) / h;
  return std::max(std::abs(north), std::abs(south));
}

}  // namespace krf
