#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "uclab/domain.hpp"
#include "uclab/ghost.hpp"
#include "uclab/operators.hpp"
#include "uclab/potentials.hpp"
#include "uclab/subspace.hpp"

using namespace uclab;

namespace {

DiscretizedHamiltonian constant_well(int n, double value) {
  const Grid g = build_grid(Domain::interval(0.0, 1.0, Bc::Dirichlet), std::array{n});
  return assemble_hamiltonian(g, Eigen::VectorXd::Constant(n, value));
}

}  // namespace

TEST_SUITE("ghost") {

TEST_CASE("spectral multiplier branches, derivatives, parity") {
  CHECK(s_eval(4.0, 0.3) == doctest::Approx(std::sinh(0.6) / 2.0).epsilon(1e-14));
  CHECK(s_eval(-4.0, 0.3) == doctest::Approx(std::sin(0.6) / 2.0).epsilon(1e-14));
  CHECK(s_eval(0.0, 0.3) == 0.3);
  CHECK(s_eval(4.0, 0.3, 1) == doctest::Approx(std::cosh(0.6)).epsilon(1e-14));
  CHECK(s_eval(-4.0, 0.3, 1) == doctest::Approx(std::cos(0.6)).epsilon(1e-14));
  CHECK(s_eval(0.0, 0.3, 1) == 1.0);
  CHECK(s_eval(4.0, 0.3, 2) == doctest::Approx(4.0 * s_eval(4.0, 0.3)).epsilon(1e-14));
  CHECK(s_eval(-4.0, 0.3, 2) == doctest::Approx(-4.0 * s_eval(-4.0, 0.3)).epsilon(1e-14));
  for (double lambda : {-9.0, -1e-7, 0.0, 3e-8, 25.0}) {
    for (int order : {0, 1, 2}) {
      const double plus = s_eval(lambda, 0.7, order);
      const double minus = s_eval(lambda, -0.7, order);
      if (order == 1) {
        CHECK(plus == minus);
      } else {
        CHECK(plus == -minus);
      }
    }
  }
  CHECK_THROWS_WITH_AS(s_eval(1.0, 0.1, 3), doctest::Contains("orders 0..2"),
                       std::invalid_argument);
}

TEST_CASE("series window joins the closed forms smoothly") {
  const double t = 1e-2;
  // straddle the |lambda| t^2 < 1e-6 switch from both sides and both signs
  for (double lambda : {9.9e-3, 1.01e-2, -9.9e-3, -1.01e-2}) {
    for (int order : {0, 1, 2}) {
      double direct;
      const double r = std::sqrt(std::abs(lambda));
      if (lambda > 0.0) {
        direct = order == 0   ? std::sinh(r * t) / r
                 : order == 1 ? std::cosh(r * t)
                              : lambda * std::sinh(r * t) / r;
      } else {
        direct = order == 0   ? std::sin(r * t) / r
                 : order == 1 ? std::cos(r * t)
                              : lambda * std::sin(r * t) / r;
      }
      CHECK(s_eval(lambda, t, order) == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_CASE("extension vanishes at t = 0 with unit initial slope") {
  const DiscretizedHamiltonian h = constant_well(40, 5.0);
  const SubspaceFunction psi = sample_subspace(h, 500.0, SampleMode::RandomMix, 21);
  const AdmissibilityConstants lam = analytic_bounded_constants(5.0);
  const GhostExtension ext = build_extension(psi, h.eigensystem(), 0.2, 33, lam);
  REQUIRE(ext.t_grid.size() == 33);
  const int mid = 16;
  CHECK(ext.t_grid[mid] == 0.0);
  CHECK(ext.t_grid.front() == doctest::Approx(-0.2));
  CHECK(ext.t_grid.back() == doctest::Approx(0.2));
  CHECK(ext.values.col(mid).cwiseAbs().maxCoeff() == 0.0);
  const double dt = ext.t_grid[mid + 1] - ext.t_grid[mid];
  const Eigen::VectorXd slope = (ext.values.col(mid + 1) - ext.values.col(mid - 1)) / (2.0 * dt);
  CHECK((slope - psi.values).cwiseAbs().maxCoeff() <=
        0.05 * psi.values.cwiseAbs().maxCoeff() + 1e-12);
  CHECK(ext.omega ==
        doctest::Approx((1.0 + 2.0 * lam.lambda1 * psi.energy + lam.lambda1 * lam.lambda1 +
                         2.0 * lam.lambda2) /
                        2.0));
  CHECK(ext.op_fingerprint == eigensystem_fingerprint(h.eigensystem()));
}

TEST_CASE("construction rejects bad slabs") {
  const DiscretizedHamiltonian h = constant_well(20, 0.0);
  const SubspaceFunction psi = sample_subspace(h, 300.0, SampleMode::RandomMix, 1);
  const AdmissibilityConstants lam = analytic_bounded_constants(0.0);
  CHECK_THROWS_WITH_AS(build_extension(psi, h.eigensystem(), 0.0, 17, lam),
                       doctest::Contains("tau > 0"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(build_extension(psi, h.eigensystem(), 0.4, 16, lam),
                       doctest::Contains("odd node count >= 9"), std::invalid_argument);
  CHECK_THROWS_AS(build_extension(psi, h.eigensystem(), 0.4, 7, lam), std::invalid_argument);
  const DiscretizedHamiltonian other = constant_well(24, 0.0);
  CHECK_THROWS_WITH_AS(build_extension(psi, other.eigensystem(), 0.4, 17, lam),
                       doctest::Contains("does not match the eigensystem"),
                       std::invalid_argument);
}

TEST_CASE("spectral residual is rounding level, fd residual is second order") {
  const DiscretizedHamiltonian h = constant_well(40, 5.0);
  const SubspaceFunction psi = sample_subspace(h, 400.0, SampleMode::RandomMix, 8);
  const AdmissibilityConstants lam = analytic_bounded_constants(5.0);
  const GhostExtension coarse = build_extension(psi, h.eigensystem(), 0.5, 17, lam);
  const GhostExtension fine = build_extension(psi, h.eigensystem(), 0.5, 33, lam);
  CHECK(pde_residual_spectral(coarse, h).relative() <= 1e-8);
  CHECK(pde_residual_spectral(fine, h).relative() <= 1e-8);
  const double rc = pde_residual_fd(coarse, h).relative();
  const double rf = pde_residual_fd(fine, h).relative();
  REQUIRE(rf > 0.0);
  const double order = std::log2(rc / rf);
  CHECK(order > 1.8);
  CHECK(order < 2.2);
}

TEST_CASE("mismatched operator or grid is rejected") {
  const DiscretizedHamiltonian h = constant_well(30, 0.0);
  const SubspaceFunction psi = sample_subspace(h, 300.0, SampleMode::RandomMix, 2);
  const GhostExtension ext =
      build_extension(psi, h.eigensystem(), 0.3, 17, analytic_bounded_constants(0.0));
  const DiscretizedHamiltonian other = constant_well(30, 5.0);
  CHECK_THROWS_WITH_AS(pde_residual_spectral(ext, other),
                       doctest::Contains("different operator"), std::invalid_argument);
  const Grid g2 = build_grid(Domain::interval(0.0, 1.0, Bc::Neumann), std::array{30});
  CHECK_THROWS_WITH_AS(h1_norm_sandwich(ext, g2),
                       doctest::Contains("grid does not match"), std::invalid_argument);
}

TEST_CASE("slab energy sits between the sandwich walls") {
  for (Bc bc : {Bc::Dirichlet, Bc::Neumann, Bc::Periodic}) {
    const Grid g = build_grid(Domain::interval(0.0, 2.0, bc), std::array{36});
    const auto cat = catalog_potentials(g.domain);
    const Potential& cosine = cat[3];
    REQUIRE(cosine.name() == "cosine");
    const DiscretizedHamiltonian h = assemble_hamiltonian(g, sample_on_grid(cosine, g));
    const SubspaceFunction psi = sample_subspace(h, 40.0, SampleMode::RandomMix, 6);
    const AdmissibilityConstants lam = analytic_bounded_constants(cosine.sup_bound().value());
    for (double tau : {0.25, 1.0}) {
      const GhostExtension ext = build_extension(psi, h.eigensystem(), tau, 33, lam);
      const SandwichReport sw = h1_norm_sandwich(ext, g);
      CHECK(sw.lower_ok);
      CHECK(sw.upper_ok);
      CHECK(sw.lower_bound <= sw.h1_sq);
      CHECK(sw.h1_sq <= sw.upper_bound);
      CHECK(sw.h1_sq == doctest::Approx(sw.mass_sq + sw.grad_sq + sw.dt_sq));
      // second-derivative split with probed relative-bound constants
      const RelativeBoundConstants rel = probe_relative_constants(h);
      CHECK(count_relative_bound_violations(h, rel.c, rel.c_tilde, 60, 99) == 0);
      const H2Report h2 = h2_decomposition(ext, h, rel.c, rel.c_tilde);
      CHECK(h2.mixed_ok);
      CHECK(h2.spatial_ok);
      CHECK(h2.mixed_margin >= 0.0);
      CHECK(h2.spatial_margin >= 0.0);
      CHECK(h2.dtt_sq > 0.0);
    }
  }
}

TEST_CASE("negative energy windows are rejected by the sandwich") {
  const DiscretizedHamiltonian h = constant_well(24, 0.0);
  const SubspaceFunction psi = sample_subspace(h, 300.0, SampleMode::RandomMix, 4);
  GhostExtension ext =
      build_extension(psi, h.eigensystem(), 0.3, 17, analytic_bounded_constants(0.0));
  ext.source.energy = -1.0;
  CHECK_THROWS_WITH_AS(h1_norm_sandwich(ext, h.grid()),
                       doctest::Contains("nonnegative energy window"),
                       std::invalid_argument);
}

TEST_CASE("parallel extension is bitwise equal to serial") {
  const DiscretizedHamiltonian h = constant_well(32, 2.0);
  const SubspaceFunction psi = sample_subspace(h, 600.0, SampleMode::RandomMix, 12);
  const AdmissibilityConstants lam = analytic_bounded_constants(2.0);
  const GhostExtension a =
      build_extension(psi, h.eigensystem(), 0.4, 33, lam, par::Exec::Serial);
  const GhostExtension b =
      build_extension(psi, h.eigensystem(), 0.4, 33, lam, par::Exec::OpenMP);
  CHECK(std::memcmp(a.values.data(), b.values.data(),
                    sizeof(double) * static_cast<std::size_t>(a.values.size())) == 0);
}

TEST_CASE("extension csv has one row per node and time") {
  const DiscretizedHamiltonian h = constant_well(12, 0.0);
  const SubspaceFunction psi = sample_subspace(h, 400.0, SampleMode::RandomMix, 3);
  const GhostExtension ext =
      build_extension(psi, h.eigensystem(), 0.3, 9, analytic_bounded_constants(0.0));
  const std::string csv = extension_csv(ext);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 12 * 9);
}

}
