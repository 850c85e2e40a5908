#include "krflow/spectral.hpp"
#include "krflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace krf {

ModeProblem assemble_mode(const ConformalMetric& metric, const Field& u, int m) {
  const Grid& g = *metric.grid;
  const int n = g.size();
  const double h = g.spacing();
  const Field eu = (-u).exp();
  const Field edge =
      0.5 * (-0.5 * (u.head(n - 1) + u.tail(n - 1))).exp() * g.face_sin() / h;

  ModeProblem mp;
  mp.m = m;
  auto& P = mp.pencil;
  P.diag = Field::Zero(n);
  P.diag.head(n - 1) += edge;
  P.diag.tail(n - 1) += edge;
  if (m != 0) {
    const Field u_th = d_theta(g, u);
    const Field qs = g.weights() / g.sin_theta();
    P.diag += 0.5 * m * m * eu * qs / g.sin_theta() - 0.5 * m * u_th * eu * qs;
  }
  P.off = -edge;
  P.mass = eu * metric.rho() * g.weights();
  return mp;
}

std::vector<const SpectrumEntry*> Spectrum::mode(int m) const {
  std::vector<const SpectrumEntry*> out;
  for (const auto& e : entries)
    if (e.mode == m) out.push_back(&e);
  std::sort(out.begin(), out.end(),
            [](auto* a, auto* b) { return a->index_in_mode < b->index_in_mode; });
  return out;
}

Spectrum weighted_spectrum(const ConformalMetric& metric, const Field& u, int m_max,
                           int k_per_mode) {
  if (m_max < 2 || k_per_mode < 3)
    throw std::invalid_argument("weighted_spectrum: need m_max >= 2 and k_per_mode >= 3");
  Spectrum spec;
  spec.metric = metric;
  spec.u = u;
  const double tol = 1e-6;
  for (int m = -m_max; m <= m_max; ++m) {
    const ModeProblem mp = assemble_mode(metric, u, m);
    const auto pairs = lowest_eigenpairs(mp.pencil, k_per_mode);
    for (int i = 0; i < int(pairs.size()); ++i) {
      const auto& p = pairs[i];
      if (!std::isfinite(p.value) || p.residual > tol * std::max(1.0, std::abs(p.value))) {
        std::ostringstream os;
        os << "eigensolve failed in mode " << m << " index " << i << " (residual " << p.residual
           << ")";
        throw SolveFail(os.str());
      }
      spec.entries.push_back({p.value, m, i, p.vector, p.residual});
    }
  }
  std::stable_sort(spec.entries.begin(), spec.entries.end(),
                   [](const auto& a, const auto& b) { return a.value < b.value; });
  for (const auto& e : spec.entries) spec.all_sorted.push_back(e.value);
  return spec;
}

double default_band_tol(const Grid& grid) { return 50.0 * grid.spacing() * grid.spacing(); }

LambdaSecond lambda_second(const Spectrum& spec, double band_tol) {
  LambdaSecond out{0.0, {}};
  double above = std::numeric_limits<double>::infinity();
  for (double v : spec.all_sorted) {
    if (std::abs(v - 1.0) <= band_tol) out.holo_band.push_back(v);
    else if (v > 1.0 + band_tol) above = std::min(above, v);
  }
  if (out.holo_band.size() != 3) {
    std::ostringstream os;
    os << "holomorphic band [1 ± " << band_tol << "] holds " << out.holo_band.size()
       << " eigenvalues, expected 3";
    throw BandAmbiguity(os.str());
  }
  if (!std::isfinite(above)) throw BandAmbiguity("no eigenvalue above the holomorphic band");
  const double top = *std::max_element(out.holo_band.begin(), out.holo_band.end());
  if (above - top < 2.0 * band_tol) throw BandAmbiguity("band not separated from λ(g)");
  out.lambda_g = above;
  return out;
}

int find_entry(const Spectrum& spec, int m, int index_in_mode) {
  for (int i = 0; i < int(spec.entries.size()); ++i)
    if (spec.entries[i].mode == m && spec.entries[i].index_in_mode == index_in_mode) return i;
  throw std::out_of_range("find_entry: branch not in spectrum");
}

EigenData eigen_data(const Spectrum& spec, int index) {
  const auto& e = spec.entries.at(index);
  const ConformalMetric& metric = spec.metric;
  const Grid& g = *metric.grid;
  EigenData d;
  d.mode = e.mode;
  d.lambda = e.value;
  const Field eu = (-spec.u).exp();
  const double V = volume(metric);
  const double norm = weighted_integral(e.vector.square(), metric, eu) / V;
  d.psi = e.vector / std::sqrt(norm);
  const Parity par = (e.mode % 2 == 0) ? Parity::even : Parity::odd;
  const Field dbar = d_theta(g, d.psi, par) - e.mode * d.psi / g.sin_theta();
  d.grad_bar_sq = 0.5 * (-2.0 * metric.w).exp() * dbar.square();
  return d;
}

double sobolev_constant_estimate(const ConformalMetric& metric) {
  const Grid& g = *metric.grid;
  std::vector<Field> probes;
  for (int l = 0; l <= 3; ++l) probes.push_back(legendre_on_grid(g, l));
  for (double sigma : {0.5, 0.25, 0.125}) {
    probes.push_back((-(g.theta() / sigma).square()).exp());
    probes.push_back((-((M_PI - g.theta()) / sigma).square()).exp());
  }
  double best = 0.0;
  for (const Field& f : probes) {
    const double num = std::sqrt(weighted_integral(f.pow(4), metric));
    const double den = weighted_integral(grad_norm_sq(f, metric) + f.square(), metric);
    best = std::max(best, num / den);
  }
  return best;
}

double plain_lambda1(const ConformalMetric& metric) {
  const Field zero = Field::Zero(metric.grid->size());
  double best = lowest_eigenpairs(assemble_mode(metric, zero, 0).pencil, 2)[1].value;
  for (int m : {-1, 1})
    best = std::min(best, lowest_eigenpairs(assemble_mode(metric, zero, m).pencil, 1)[0].value);
  return best;
}

}  // namespace krf
