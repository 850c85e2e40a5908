#include "krflow/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace krf {

Grid::Grid(int n_nodes) : n_(n_nodes) {
  if (n_nodes < kMinNodes)
    throw std::invalid_argument("Grid: need at least " + std::to_string(kMinNodes) +
                                " nodes, got " + std::to_string(n_nodes));
  h_ = std::numbers::pi / n_;
  theta_ = (Field::LinSpaced(n_, 0, n_ - 1) + 0.5) * h_;
  sin_ = theta_.sin();
  cos_ = theta_.cos();
  cot_ = cos_ / sin_;
  // cos(θ-h/2) - cos(θ+h/2) = 2 sin(h/2) sinθ
  weights_ = 2.0 * std::sin(0.5 * h_) * sin_;
  face_sin_ = (Field::LinSpaced(n_ - 1, 1, n_ - 1) * h_).sin();
}

GridPtr make_grid(int n_nodes) { return std::make_shared<const Grid>(n_nodes); }

Field legendre_on_grid(const Grid& grid, int l) {
  const Field& x = grid.cos_theta();
  Field p0 = Field::Ones(grid.size());
  if (l == 0) return p0;
  Field p1 = x;
  for (int k = 2; k <= l; ++k) {
    Field p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / double(k);
    p0 = std::move(p1);
    p1 = std::move(p2);
  }
  return p1;
}

}  // namespace krf
