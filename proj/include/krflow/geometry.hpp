#pragma once

#include "krflow/grid.hpp"

#include <utility>

namespace krf {

/// Axisymmetric metric g = e^{2w} g_round on S².
struct ConformalMetric {
  GridPtr grid;
  Field w;
  int complex_dim = 1;

  ConformalMetric() = default;
  ConformalMetric(GridPtr g, Field w_, int n = 1);

  /// Area density e^{2w}.
  Field rho() const { return (2.0 * w).exp(); }
};

ConformalMetric round_metric(const GridPtr& grid);

enum class Parity { even, odd };

/// Conservative round Laplacian (1/sinθ)∂(sinθ ∂f) with zero pole flux.
/// Sums to zero against the quadrature weights exactly.
Field laplacian_fv(const Grid& grid, const Field& f);

/// Centred ∂_θ; the ghost node past each pole mirrors f (even) or -f (odd).
Field d_theta(const Grid& grid, const Field& f, Parity parity = Parity::even);
Field d2_theta(const Grid& grid, const Field& f, Parity parity = Parity::even);
/// Non-conservative f'' + cotθ f', used where an independent stencil is wanted.
Field laplacian_pointwise(const Grid& grid, const Field& f);

Field gaussian_curvature(const ConformalMetric& metric);
double volume(const ConformalMetric& metric);
double diameter(const ConformalMetric& metric);

/// 2π Σ f·weight·e^{2w}·q; pass an empty weight for weight ≡ 1.
double weighted_integral(const Field& f, const ConformalMetric& metric,
                         const Field& weight = Field());

/// Complex gradient norm ½e^{-2w}(∂_θ f)².
Field grad_norm_sq(const Field& f, const ConformalMetric& metric);

double noncollapsing_kappa(const ConformalMetric& metric, double rho);

std::pair<double, double> curvature_bounds(const ConformalMetric& metric);

/// Largest one-sided slope of w extrapolated to either pole.
double pole_regularity_defect(const ConformalMetric& metric);

/// Meridian arclength from θ = 0 to each cell face, N+1 values.
Field meridian_arclength(const ConformalMetric& metric);

}  // namespace krf
