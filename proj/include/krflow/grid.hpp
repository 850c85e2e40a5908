#pragma once

#include <Eigen/Core>
#include <memory>

namespace krf {

/// Nodal values on the polar-angle grid. All fields in the library are plain
/// Eigen arrays indexed by node.
using Field = Eigen::ArrayXd;

/// Staggered uniform grid on (0, π): node j sits at (j + ½)h, h = π/N, so no
/// node touches a pole. The quadrature weight of node j is the exact measure of
/// its cell under sinθ dθ, hence `integrate(1) == 2` to roundoff.
class Grid {
 public:
  static constexpr int kMinNodes = 16;

  explicit Grid(int n_nodes);

  int size() const { return n_; }
  double spacing() const { return h_; }

  const Field& theta() const { return theta_; }
  const Field& sin_theta() const { return sin_; }
  const Field& cos_theta() const { return cos_; }
  const Field& cot_theta() const { return cot_; }
  const Field& weights() const { return weights_; }
  /// sinθ at the N-1 interior cell faces θ = (j+1)h.
  const Field& face_sin() const { return face_sin_; }

  /// ∫₀^π f sinθ dθ by cell quadrature.
  double integrate(const Field& f) const { return (weights_ * f).sum(); }

 private:
  int n_;
  double h_;
  Field theta_, sin_, cos_, cot_, weights_, face_sin_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(int n_nodes);

/// Legendre polynomial P_l evaluated at cosθ on every node.
Field legendre_on_grid(const Grid& grid, int l);

}  // namespace krf
