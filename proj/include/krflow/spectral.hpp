#pragma once

#include "krflow/geometry.hpp"
#include "krflow/tridiag.hpp"

#include <vector>

namespace krf {

/// Discrete L = -Δ + ∇u·∇̄ restricted to e^{imφ}R(θ). The quadratic form is
/// ½∫(R' - mR/sinθ)² e^{-u} sinθ dθ, so m and -m are different problems once u ≠ 0.
struct ModeProblem {
  int m = 0;
  TridiagPencil<double> pencil;
};

ModeProblem assemble_mode(const ConformalMetric& metric, const Field& u, int m);

struct SpectrumEntry {
  double value;
  int mode;
  int index_in_mode;
  Field vector;  // radial profile, M-orthonormal
  double residual;
};

struct Spectrum {
  std::vector<SpectrumEntry> entries;  // ascending by value
  std::vector<double> all_sorted;
  ConformalMetric metric;
  Field u;

  /// Entries of one mode, ascending.
  std::vector<const SpectrumEntry*> mode(int m) const;
};

/// Modes -m_max..m_max, lowest k_per_mode in each.
Spectrum weighted_spectrum(const ConformalMetric& metric, const Field& u, int m_max = 3,
                           int k_per_mode = 4);

double default_band_tol(const Grid& grid);

struct LambdaSecond {
  double lambda_g;
  std::vector<double> holo_band;
};

LambdaSecond lambda_second(const Spectrum& spec, double band_tol);

struct EigenData {
  int mode;
  double lambda;
  Field psi;          // radial profile with (1/V)∫|ψ|²e^{-u}dv = 1
  Field grad_bar_sq;  // |∇̄ψ|²
};

/// `index` refers to `spec.entries`.
EigenData eigen_data(const Spectrum& spec, int index);

/// Index into spec.entries of the `index_in_mode`-th eigenvalue of mode m.
int find_entry(const Spectrum& spec, int m, int index_in_mode);

/// Lower bound for C_s in (∫f⁴)^{1/2} ≤ C_s ∫(|∇f|² + f²) over a fixed probe family.
double sobolev_constant_estimate(const ConformalMetric& metric);

/// First positive eigenvalue of -Δ_c (no weight).
double plain_lambda1(const ConformalMetric& metric);

}  // namespace krf
