#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace krf {

/// Symmetric tridiagonal pencil (A, M) with M diagonal positive.
template <typename Scalar>
struct TridiagPencil {
  using Vec = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  Vec diag;  // A(i,i)
  Vec off;   // A(i,i+1), length n-1
  Vec mass;  // M(i,i)

  Eigen::Index size() const { return diag.size(); }

  /// Number of eigenvalues of A x = λ M x strictly below sigma (Sylvester inertia
  /// of the LDLᵀ factorization of A - σM).
  int count_below(Scalar sigma) const {
    const Eigen::Index n = size();
    int neg = 0;
    Scalar p = diag(0) - sigma * mass(0);
    const Scalar tiny = std::numeric_limits<Scalar>::min();
    for (Eigen::Index i = 0;; ++i) {
      if (p == Scalar(0)) p = -tiny;
      if (p < Scalar(0)) ++neg;
      if (i + 1 == n) break;
      p = diag(i + 1) - sigma * mass(i + 1) - off(i) * off(i) / p;
    }
    return neg;
  }

  /// Gershgorin interval for M^{-1/2} A M^{-1/2}.
  std::pair<Scalar, Scalar> bounds() const {
    const Eigen::Index n = size();
    Scalar lo = std::numeric_limits<Scalar>::max(), hi = -lo;
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar r = 0;
      if (i > 0) r += std::abs(off(i - 1)) / std::sqrt(mass(i) * mass(i - 1));
      if (i + 1 < n) r += std::abs(off(i)) / std::sqrt(mass(i) * mass(i + 1));
      lo = std::min(lo, diag(i) / mass(i) - r);
      hi = std::max(hi, diag(i) / mass(i) + r);
    }
    return {lo, hi};
  }

  /// y = (A - σM) x
  Vec apply_shifted(const Vec& x, Scalar sigma) const {
    Vec y = (diag - sigma * mass) * x;
    const Eigen::Index n = size();
    y.head(n - 1) += off * x.tail(n - 1);
    y.tail(n - 1) += off * x.head(n - 1);
    return y;
  }
};

template <typename Scalar>
struct TridiagEigenpair {
  Scalar value;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> vector;  // M-orthonormal
  Scalar residual;                                 // ‖(A-λM)x‖ / ‖Mx‖
};

/// Lowest k eigenpairs by Sturm bisection and inverse iteration.
template <typename Scalar>
std::vector<TridiagEigenpair<Scalar>> lowest_eigenpairs(const TridiagPencil<Scalar>& P, int k) {
  using Vec = typename TridiagPencil<Scalar>::Vec;
  const Eigen::Index n = P.size();
  k = int(std::min<Eigen::Index>(k, n));
  auto [lo0, hi0] = P.bounds();
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  const Scalar scale = std::max(std::abs(lo0), std::abs(hi0));

  std::vector<TridiagEigenpair<Scalar>> out;
  out.reserve(k);
  for (int idx = 0; idx < k; ++idx) {
    Scalar lo = out.empty() ? lo0 : out.back().value - Scalar(4) * eps * std::abs(out.back().value), hi = hi0;
    // relative stopping rule; the floor only matters for the null eigenvalue
    const Scalar floor = eps * eps * scale;
    for (int it = 0; it < 400 && hi - lo > std::max(Scalar(2) * eps * std::max(std::abs(lo), std::abs(hi)), floor); ++it) {
      const Scalar mid = Scalar(0.5) * (lo + hi);
      if (P.count_below(mid) > idx) hi = mid;
      else lo = mid;
    }
    const Scalar lambda = Scalar(0.5) * (lo + hi);

    // inverse iteration on (A - λM) x = M y, Thomas without pivoting
    const Scalar shift = lambda + Scalar(16) * eps * std::max(scale, Scalar(1));
    Vec x = Vec::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) += Scalar(1e-3) * Scalar(i % 7);
    for (const auto& prev : out) x -= (prev.vector * P.mass * x).sum() * prev.vector;
    for (int sweep = 0; sweep < 3; ++sweep) {
      Vec b = P.mass * x;
      Vec c(n), d(n);
      Scalar piv = P.diag(0) - shift * P.mass(0);
      const Scalar tiny = eps * scale;
      if (std::abs(piv) < tiny) piv = tiny;
      c(0) = n > 1 ? P.off(0) / piv : Scalar(0);
      d(0) = b(0) / piv;
      for (Eigen::Index i = 1; i < n; ++i) {
        piv = P.diag(i) - shift * P.mass(i) - P.off(i - 1) * c(i - 1);
        if (std::abs(piv) < tiny) piv = tiny;
        c(i) = i + 1 < n ? P.off(i) / piv : Scalar(0);
        d(i) = (b(i) - P.off(i - 1) * d(i - 1)) / piv;
      }
      x(n - 1) = d(n - 1);
      for (Eigen::Index i = n - 2; i >= 0; --i) x(i) = d(i) - c(i) * x(i + 1);
      for (const auto& prev : out) x -= (prev.vector * P.mass * x).sum() * prev.vector;
      x /= std::sqrt((x * x * P.mass).sum());
    }
    // fix the sign so the largest component is positive
    Eigen::Index imax;
    x.abs().maxCoeff(&imax);
    if (x(imax) < Scalar(0)) x = -x;
    const Scalar res = std::sqrt(P.apply_shifted(x, lambda).square().sum()) /
                       std::sqrt((P.mass * x).square().sum());
    out.push_back({lambda, x, res});
  }
  return out;
}

}  // namespace krf
