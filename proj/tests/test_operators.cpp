#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "uclab/domain.hpp"
#include "uclab/operators.hpp"
#include "uclab/rng.hpp"

using namespace uclab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// trigonometric eigenvalues of the 1D second-difference matrix, ascending
double closed_form_eigenvalue(Bc bc, int n, double h, int j) {
  switch (bc) {
    case Bc::Dirichlet: {
      const double s = std::sin((j + 1) * kPi / (2.0 * (n + 1)));
      return 4.0 * s * s / (h * h);
    }
    case Bc::Neumann: {
      const double s = std::sin(j * kPi / (2.0 * n));
      return 4.0 * s * s / (h * h);
    }
    case Bc::Periodic: {
      // pairs k and n-k coincide, so ascending order walks 0,1,1,2,2,...
      const int k = (j + 1) / 2;
      const double s = std::sin(k * kPi / n);
      return 4.0 * s * s / (h * h);
    }
  }
  return 0.0;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("axis eigenvalues match the trigonometric closed forms") {
  for (Bc bc : {Bc::Dirichlet, Bc::Neumann, Bc::Periodic}) {
    for (int n : {3, 8, 17}) {
      const Grid g = build_grid(Domain::interval(0.0, 1.5, bc), std::array{n});
      const double h = g.h[0];
      const Eigendecomposition eig = eigendecompose(axis_laplacian(bc, n, h), h);
      for (int j = 0; j < n; ++j) {
        const double exact = closed_form_eigenvalue(bc, n, h, j);
        CHECK(std::abs(eig.eigenvalues(j) - exact) <= 1e-10 * (1.0 + exact));
      }
    }
  }
}

TEST_CASE("difference factor reproduces the laplacian") {
  struct Case { Bc bc; int rows; };
  for (Case c : {Case{Bc::Dirichlet, 7}, Case{Bc::Neumann, 5}, Case{Bc::Periodic, 6}}) {
    const int n = 6;
    const double h = 0.31;
    const Eigen::MatrixXd d = axis_difference(c.bc, n, h);
    CHECK(d.rows() == c.rows);
    CHECK(d.cols() == n);
    const Eigen::MatrixXd k = axis_laplacian(c.bc, n, h);
    CHECK((d.transpose() * d - k).cwiseAbs().maxCoeff() <=
          1e-12 * k.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("tensor laplacian eigenvalues are sums of axis eigenvalues") {
  const Domain d = Domain::make(std::array{0.0, 0.0}, std::array{1.0, 0.8},
                                std::array{Bc::Dirichlet, Bc::Periodic});
  const Grid g = build_grid(d, std::array{5, 4});
  const Eigendecomposition eig = eigendecompose(assemble_laplacian(g), g.cell_volume());
  const Eigendecomposition e0 = eigendecompose(axis_laplacian(Bc::Dirichlet, 5, g.h[0]), g.h[0]);
  const Eigendecomposition e1 = eigendecompose(axis_laplacian(Bc::Periodic, 4, g.h[1]), g.h[1]);
  std::vector<double> sums;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 4; ++j) sums.push_back(e0.eigenvalues(i) + e1.eigenvalues(j));
  std::sort(sums.begin(), sums.end());
  for (int k = 0; k < 20; ++k)
    CHECK(std::abs(eig.eigenvalues(k) - sums[static_cast<std::size_t>(k)]) <=
          1e-10 * (1.0 + sums[static_cast<std::size_t>(k)]));
}

TEST_CASE("eigendecompose normalizes in the weighted inner product with fixed signs") {
  const Grid g = build_grid(Domain::interval(0.0, 1.0, Bc::Dirichlet), std::array{12});
  const Eigen::MatrixXd k = axis_laplacian(Bc::Dirichlet, 12, g.h[0]);
  const Eigendecomposition a = eigendecompose(k, g.cell_volume());
  const Eigendecomposition b = eigendecompose(k, g.cell_volume());
  for (int j = 0; j < 12; ++j) {
    CHECK(g.cell_volume() * a.eigenvectors.col(j).squaredNorm() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(std::memcmp(a.eigenvectors.data(), b.eigenvectors.data(), sizeof(double) * 144) == 0);
  CHECK_THROWS_WITH_AS(eigendecompose(k, g.cell_volume(), 8),
                       doctest::Contains("exceeds"), std::invalid_argument);
}

TEST_CASE("hamiltonian applies laplacian plus multiplication") {
  const Grid g = build_grid(Domain::interval(0.0, 2.0, Bc::Neumann), std::array{9});
  Eigen::VectorXd pot(9);
  for (int i = 0; i < 9; ++i) pot(i) = 0.3 * i;
  const DiscretizedHamiltonian ham = assemble_hamiltonian(g, pot);
  CHECK(ham.dimension() == 9);
  Eigen::VectorXd x(9);
  rng::Sequence seq(5);
  for (int i = 0; i < 9; ++i) x(i) = seq.next_normal();
  const Eigen::VectorXd dense = ham.matrix() * x;
  const Eigen::VectorXd fast = ham.apply(x);
  CHECK((dense - fast).cwiseAbs().maxCoeff() <= 1e-12 * dense.cwiseAbs().maxCoeff());
  // the eigensystem is solved once and cached
  CHECK(&ham.eigensystem() == &ham.eigensystem());
  CHECK(ham.min_eigenvalue() == ham.eigensystem().eigenvalues(0));
  CHECK_THROWS_AS(assemble_hamiltonian(g, Eigen::VectorXd::Zero(8)), std::invalid_argument);
}

TEST_CASE("natural stiffness never exceeds the assembled boundary form") {
  for (Bc bc : {Bc::Dirichlet, Bc::Neumann, Bc::Periodic}) {
    const Grid g = build_grid(Domain::interval(0.0, 1.0, bc), std::array{10});
    const Eigen::MatrixXd kf = free_stiffness(g);
    rng::Sequence seq(17);
    for (int t = 0; t < 25; ++t) {
      Eigen::VectorXd x(10);
      for (int i = 0; i < 10; ++i) x(i) = seq.next_normal();
      const double natural = g.cell_volume() * x.dot(kf * x);
      CHECK(natural >= -1e-12);
      CHECK(natural <= gradient_energy(g, x) + 1e-12 * (1.0 + std::abs(natural)));
    }
  }
}

TEST_CASE("weighted l2 norm uses the cell volume") {
  const Grid g = build_grid(Domain::interval(0.0, 3.0, Bc::Periodic), std::array{6});
  CHECK(l2_norm_sq(g, Eigen::VectorXd::Ones(6)) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("apply_along_axis handles rectangular one-axis operators") {
  const Domain d = Domain::make(std::array{0.0, 0.0}, std::array{1.0, 1.0},
                                std::array{Bc::Dirichlet, Bc::Neumann});
  const Grid g = build_grid(d, std::array{4, 3});
  const Eigen::MatrixXd diff = axis_difference(Bc::Dirichlet, 4, g.h[0]);  // 5 x 4
  const Eigen::VectorXd in = Eigen::VectorXd::LinSpaced(12, 0.0, 11.0);
  const Eigen::VectorXd out = apply_along_axis(g, diff, 0, in);
  REQUIRE(out.size() == 15);
  // row (i, j) of the output contracts the operator over axis 0 at fixed j
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 5; ++i) {
      double expect = 0.0;
      for (int k = 0; k < 4; ++k) expect += diff(i, k) * in(k + 4 * j);
      CHECK(out(i + 5 * j) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("degenerate axis operators are rejected") {
  CHECK_THROWS_AS(axis_laplacian(Bc::Dirichlet, 0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(axis_laplacian(Bc::Dirichlet, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_WITH_AS(axis_laplacian(Bc::Periodic, 2, 0.1),
                       doctest::Contains("periodic axis needs n >= 3"),
                       std::invalid_argument);
  CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd::Zero(2, 3), 1.0), std::invalid_argument);
}

}
