#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "uclab/carleman.hpp"
#include "uclab/rng.hpp"

using namespace uclab;

TEST_SUITE("carleman") {

TEST_CASE("weight profile oracle values") {
  CHECK(phi_integral(0.0) == 0.0);
  // frozen from an independent 40-digit evaluation of the exponential
  // integral difference
  CHECK(std::abs(phi_integral(1.0) - 0.7965995992970531) <= 1e-9);
  CHECK(std::abs(phi_eval(1.0) - 0.45085946332321999) <= 1e-9);
  // the integrand is positive, so Phi increases and phi stays below r
  CHECK(phi_integral(0.5) < phi_integral(1.0));
  CHECK(phi_eval(0.5) < 0.5);
  CHECK(phi_eval(0.0) == 0.0);
  CHECK_THROWS_AS(phi_integral(-0.1), std::invalid_argument);
  CHECK_THROWS_WITH_AS(phi_eval(1.3), doctest::Contains("[0, 1.2]"),
                       std::invalid_argument);
}

TEST_CASE("tabulated profile matches the direct quadrature") {
  const AnnulusWeight w(0.4);
  for (double r : {0.05, 0.3, 0.77, 1.0, 1.2}) {
    CHECK(std::abs(w.phi(r) - phi_eval(r)) <= 1e-8);
    CHECK(w.log_phi(r) == doctest::Approx(std::log(w.phi(r))).epsilon(1e-10));
  }
  CHECK(w.phi_prime(0.0) == doctest::Approx(1.0));
}

TEST_CASE("weight chains hold on dense annulus samples") {
  const double rho = 0.35;
  const AnnulusWeight w(rho);
  rng::Sequence seq(13);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    std::array<double, 3> y{seq.next_normal(), seq.next_normal(), seq.next_normal()};
    double norm = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    if (norm == 0.0) continue;
    const double radius = rho * std::max(1e-6, seq.next_uniform01());
    for (double& c : y) c *= radius / norm;
    const AnnulusWeight::Eval e = w.eval(y);  // throws if a chain breaks
    CHECK(e.w >= radius / (rho * 2.718281828459045235) - 1e-12);
    CHECK(e.w <= radius / rho + 1e-12);
    const double g2 = e.grad[0] * e.grad[0] + e.grad[1] * e.grad[1] + e.grad[2] * e.grad[2];
    CHECK(g2 <= 1.0 / (rho * rho) + 1e-9);
    ++checked;
  }
  CHECK(checked > 9900);
  CHECK_THROWS_WITH_AS(w.eval(std::array{0.0, 0.0, 0.0}),
                       doctest::Contains("0 < |y| <= rho"), std::invalid_argument);
  CHECK_THROWS_AS(w.eval(std::array{rho + 0.01, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("drift weight and calibrated thresholds") {
  CHECK(drift_weight(std::array{0.1, 0.2, 0.3}) == doctest::Approx(-0.2675).epsilon(1e-14));
  CHECK(drift_weight(std::array{0.1, 0.3}) == doctest::Approx(-0.2575).epsilon(1e-14));
  CHECK(nrt_alpha0(1.0, 8.0, 0.5, 1.0, 2.0) ==
        doctest::Approx(5.5874010519681994).epsilon(1e-14));
  CHECK(nrt_alpha0(0.0, 0.0, 0.5, 1.7, 2.0) == 1.7);
  CHECK(lr_beta0(1.0, 8.0, 0.25, 1.0, 2.0) == doctest::Approx(4.25).epsilon(1e-14));
  CHECK_THROWS_WITH_AS(lr_beta0(1.0, 8.0, 0.6, 1.0, 2.0),
                       doctest::Contains("2 - sqrt 2"), std::invalid_argument);
  CHECK_THROWS_AS(nrt_alpha0(-1.0, 0.0, 0.5, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("drift weight is pseudoconvex on small balls only") {
  for (double rho : {0.3, 0.5}) {
    const PseudoconvexityReport rep = lr_pseudoconvexity_check(rho, 2000);
    CHECK(rep.time_derivative_ok);
    CHECK(rep.convexity_ok);
    CHECK(rep.violations == 0);
    CHECK(rep.min_dt_abs > 0.0);
    CHECK(rep.min_margin > 0.0);
  }
  // past the critical radius the constrained Hessian form changes sign
  const PseudoconvexityReport bad = lr_pseudoconvexity_check(0.9, 2000);
  CHECK_FALSE(bad.convexity_ok);
  CHECK(bad.violations > 0);
  CHECK(bad.min_margin <= 0.0);
  CHECK_THROWS_AS(lr_pseudoconvexity_check(1.5, 100), std::invalid_argument);
}

TEST_CASE("empirical rows are finite and execution independent") {
  CarlemanTrial trial;  // annulus weight, total_dim 2, rho 0.3, resolution 64
  const std::vector<double> sweep{2.0, 5.0};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  const std::vector<CarlemanRow> rows = empirical_carleman(trial, sweep, seeds);
  REQUIRE(rows.size() == 6);
  for (const CarlemanRow& r : rows) {
    CHECK(r.lhs > 0.0);
    CHECK(r.rhs > 0.0);
    CHECK(r.ratio == doctest::Approx(r.lhs / r.rhs).epsilon(1e-13));
    CHECK(r.resolution >= trial.resolution);
  }
  const std::vector<CarlemanRow> par_rows =
      empirical_carleman(trial, sweep, seeds, par::Exec::OpenMP);
  REQUIRE(par_rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(std::memcmp(&rows[i].lhs, &par_rows[i].lhs, sizeof(double)) == 0);
    CHECK(std::memcmp(&rows[i].rhs, &par_rows[i].rhs, sizeof(double)) == 0);
  }
  CHECK_THROWS_AS(empirical_carleman(trial, {}, seeds), std::invalid_argument);
}

TEST_CASE("drift family rejects radii without pseudoconvexity") {
  CarlemanTrial trial;
  trial.kind = CarlemanKind::Lr;
  trial.rho = 0.7;  // past 2 - sqrt 2
  const std::vector<double> sweep{2.0};
  const std::vector<std::uint64_t> seeds{1};
  CHECK_THROWS_WITH_AS(empirical_carleman(trial, sweep, seeds),
                       doctest::Contains("rho < 2 - sqrt 2"), std::invalid_argument);
}

TEST_CASE("baseline calibration freezes the screening constants") {
  CarlemanTrial trial;
  const std::vector<double> sweep{1.5, 3.0};
  const std::vector<std::uint64_t> seeds{4, 5};
  const BaselineCalibration base = calibrate_baseline(trial, sweep, seeds);
  CHECK(base.threshold_tilde == 1.5);
  REQUIRE(base.rows.size() == 4);
  const double rho4 = std::pow(trial.rho, 4);
  double worst = 0.0;
  for (const CarlemanRow& r : base.rows) worst = std::max(worst, r.ratio / rho4);
  CHECK(base.constant_tilde == doctest::Approx(worst).epsilon(1e-13));
  CHECK(fitted_constant(trial, base.rows, 1.5) == doctest::Approx(worst).epsilon(1e-13));
  CHECK_THROWS_WITH_AS(fitted_constant(trial, base.rows, 99.0),
                       doctest::Contains("no rows at or above the screening threshold"),
                       std::invalid_argument);
}

TEST_CASE("trial threshold blends the baseline with the potential constants") {
  CarlemanTrial trial;
  trial.baseline_threshold = 1.0;
  trial.baseline_constant = 2.0;
  trial.lambda1 = 1.0;
  trial.lambda2 = 8.0;
  trial.rho = 0.5;
  CHECK(trial.threshold() == doctest::Approx(nrt_alpha0(1.0, 8.0, 0.5, 1.0, 2.0)));
  trial.kind = CarlemanKind::Lr;
  trial.rho = 0.25;
  CHECK(trial.threshold() == doctest::Approx(lr_beta0(1.0, 8.0, 0.25, 1.0, 2.0)));
  // without a potential the threshold collapses to the baseline
  CarlemanTrial clean;
  clean.baseline_threshold = 1.3;
  CHECK(clean.threshold() == 1.3);
}

TEST_CASE("csv mirrors the rows") {
  CarlemanTrial trial;
  const std::vector<double> sweep{2.0};
  const std::vector<std::uint64_t> seeds{7};
  const std::vector<CarlemanRow> rows = empirical_carleman(trial, sweep, seeds);
  const std::string csv = carleman_csv(trial, rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(rows.size()));
}

}
