#include <doctest.h>

#include "krflow/tridiag.hpp"

#include <Eigen/Dense>
#include <random>

using namespace krf;

namespace {
TridiagPencil<double> random_pencil(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(0.1, 2.0);
  TridiagPencil<double> P;
  P.diag.resize(n);
  P.off.resize(n - 1);
  P.mass.resize(n);
  for (int i = 0; i < n; ++i) P.mass(i) = U(gen);
  for (int i = 0; i + 1 < n; ++i) P.off(i) = -U(gen);
  for (int i = 0; i < n; ++i) P.diag(i) = 2.5 + U(gen);
  return P;
}
}  // namespace

TEST_CASE("matches a dense generalized eigensolver") {
  for (unsigned seed : {1u, 2u, 3u}) {
    const int n = 60;
    const auto P = random_pencil(n, seed);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      A(i, i) = P.diag(i);
      M(i, i) = P.mass(i);
      if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = P.off(i);
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
    const auto pairs = lowest_eigenpairs(P, 6);
    REQUIRE(pairs.size() == 6);
    for (int k = 0; k < 6; ++k) {
      CHECK(pairs[k].value == doctest::Approx(es.eigenvalues()(k)).epsilon(1e-12));
      CHECK(pairs[k].residual < 1e-10);
      const Eigen::ArrayXd ref = es.eigenvectors().col(k).array();
      const double overlap = std::abs((ref * P.mass * pairs[k].vector).sum());
      CHECK(overlap == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("eigenvectors are M-orthonormal") {
  const auto P = random_pencil(40, 9);
  const auto pairs = lowest_eigenpairs(P, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double ip = (pairs[i].vector * P.mass * pairs[j].vector).sum();
      CHECK(ip == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-9));
    }
}

TEST_CASE("inertia count") {
  // second difference: eigenvalues 2 - 2cos(kπ/(n+1))
  const int n = 20;
  TridiagPencil<double> P{Eigen::ArrayXd::Constant(n, 2.0), Eigen::ArrayXd::Constant(n - 1, -1.0),
                          Eigen::ArrayXd::Ones(n)};
  const double l3 = 2 - 2 * std::cos(3 * M_PI / (n + 1));
  CHECK(P.count_below(l3 - 1e-9) == 2);
  CHECK(P.count_below(l3 + 1e-9) == 3);
  CHECK(P.count_below(5.0) == n);
}

TEST_CASE("single precision instantiation") {
  const int n = 20;
  TridiagPencil<float> P{Eigen::ArrayXf::Constant(n, 2.0f), Eigen::ArrayXf::Constant(n - 1, -1.0f),
                         Eigen::ArrayXf::Ones(n)};
  const auto pairs = lowest_eigenpairs(P, 2);
  CHECK(pairs[0].value == doctest::Approx(2 - 2 * std::cos(M_PI / (n + 1))).epsilon(1e-5));
}

TEST_CASE("null eigenvalue resolved without relative noise") {
  // graph Laplacian of a path: exact zero mode
  const int n = 30;
  Eigen::ArrayXd d = Eigen::ArrayXd::Constant(n, 2.0);
  d(0) = d(n - 1) = 1.0;
  TridiagPencil<double> P{d, Eigen::ArrayXd::Constant(n - 1, -1.0), Eigen::ArrayXd::Ones(n)};
  const auto pairs = lowest_eigenpairs(P, 2);
  CHECK(std::abs(pairs[0].value) < 1e-14);
  CHECK(pairs[1].value == doctest::Approx(2 - 2 * std::cos(M_PI / n)).epsilon(1e-12));
}
