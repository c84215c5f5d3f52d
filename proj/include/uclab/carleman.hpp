#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uclab/parallel.hpp"
#include "uclab/potentials.hpp"

namespace uclab {

// Phi(r) = integral of (1 - e^{-t})/t over [0, r], by adaptive Simpson with
// the series value of the integrand near t = 0. Absolute error <= 1e-10.
double phi_integral(double r);

// phi(r) = r e^{-Phi(r)} on [0, 1.2]; out-of-range r is rejected, the table
// domain is all the annulus trials ever need.
double phi_eval(double r);

// Radial weight w(y) = phi(|y| / rho). Construction tabulates Phi once on
// [0, 1.2]; every evaluation checks the pointwise chains
//   |y|/(rho e) <= w <= |y|/rho   and   |grad w|^2 <= w^2/|y|^2 <= 1/rho^2
// inline and refuses to return a value that breaks them.
class AnnulusWeight {
 public:
  explicit AnnulusWeight(double rho);

  double rho() const { return rho_; }
  double phi(double r) const;        // table interpolation, r in [0, 1.2]
  double phi_prime(double r) const;  // e^{-Phi(r)} e^{-r}
  double log_phi(double r) const;    // log phi, for overflow-safe powers

  // log w(y) given |y|, with the same chain checks as eval.
  double checked_log(double dist) const;

  struct Eval {
    double w = 0.0;
    std::array<double, 3> grad{0.0, 0.0, 0.0};
  };
  Eval eval(std::span<const double> y) const;

 private:
  double table_phi_integral(double r) const;
  double rho_ = 0.0;
  double step_ = 0.0;
  std::vector<double> table_;  // Phi at uniform nodes on [0, 1.2]
};

// u(x, t) = -t + t^2/2 - |x|^2/4 with t the last coordinate of y.
double drift_weight(std::span<const double> y);

// alpha0 = max{alpha0_tilde, 8 c0_tilde l1 rho^2 + (4 c0_tilde l2 rho^4)^{1/3}}
double nrt_alpha0(double lambda1, double lambda2, double rho, double alpha0_tilde,
                  double c0_tilde);

// beta0 = max{beta0_tilde, 2 c1_tilde l1 rho^2 + (4 c1_tilde l2)^{1/3}};
// rho must lie in (0, 2 - sqrt 2), the range where the drift weight is
// pseudoconvex.
double lr_beta0(double lambda1, double lambda2, double rho, double beta0_tilde,
                double c1_tilde);

struct PseudoconvexityReport {
  bool time_derivative_ok = false;  // |d/dt u| bounded away from zero
  bool convexity_ok = false;        // constrained Hessian form positive
  double min_dt_abs = 0.0;
  double min_margin = 0.0;          // worst value of the constrained form
  std::array<double, 3> worst_point{0.0, 0.0, 0.0};
  int violations = 0;               // sample points where the form went <= 0
};

// Samples the upper half ball of radius rho in total_dim coordinates and
// tests both conditions on projected tangential covectors, including the one
// minimizing the time component (the extremal case). rho in (0, 1).
PseudoconvexityReport lr_pseudoconvexity_check(double rho, int samples, int total_dim = 3,
                                               std::uint64_t seed = 0x6c727063ull);

enum class CarlemanKind { Nrt, Lr };

// One empirical inequality family: dimension, weight kind, an annulus bump
// family, the potential on the spatial slice, and the calibrated baseline
// constants for the V = 0 case.
struct CarlemanTrial {
  CarlemanKind kind = CarlemanKind::Nrt;
  int total_dim = 2;                  // spatial dim + 1
  double rho = 0.3;
  double sigma = 0.1;                 // inner support radius fraction
  std::optional<Potential> potential; // empty means V = 0
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double baseline_threshold = 1.0;    // calibrated alpha0~ / beta0~
  double baseline_constant = 1.0;     // calibrated C0~ / C1~
  int resolution = 64;                // base quadrature points per axis

  // alpha0 or beta0 from the threshold formulas above.
  double threshold() const;
};

struct CarlemanRow {
  double exponent = 0.0;  // the alpha or beta of this evaluation
  std::uint64_t seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  int resolution = 0;       // effective points per axis used
  double refined_ratio = 0.0;
  bool refine_flagged = false;  // doubling moved the ratio by 5% or more
};

// Evaluates LHS/RHS of the weighted inequality for every (exponent, seed)
// pair. Test functions are radial polynomial bumps supported in the annulus
// sigma rho <= |y| <= rho (the drift-weight family carries an extra factor t
// so the initial trace vanishes); derivatives are closed-form, integrals are
// tensor trapezoid with resolution growing with the exponent, and every row
// is re-evaluated at doubled resolution to flag under-resolved quadrature.
std::vector<CarlemanRow> empirical_carleman(const CarlemanTrial& trial,
                                            std::span<const double> sweep,
                                            std::span<const std::uint64_t> seeds,
                                            par::Exec exec = par::Exec::Serial);

struct BaselineCalibration {
  double threshold_tilde = 1.0;  // smallest swept exponent
  double constant_tilde = 1.0;   // max ratio/rho^4 (annulus) or max ratio (drift)
  std::vector<CarlemanRow> rows;
};

// Runs the V = 0 family over the sweep and freezes the baseline constants
// that all potential-bearing trials are screened against.
BaselineCalibration calibrate_baseline(CarlemanTrial trial, std::span<const double> sweep,
                                       std::span<const std::uint64_t> seeds,
                                       par::Exec exec = par::Exec::Serial);

// Fitted constant of a finished trial: max ratio / rho^4 for the annulus
// weight, max ratio for the drift weight, over rows at or above `threshold`.
double fitted_constant(const CarlemanTrial& trial, std::span<const CarlemanRow> rows,
                       double threshold);

// (weight kind, d, rho, exponent, seed, lhs, rhs, ratio, refine_flag) rows.
std::string carleman_csv(const CarlemanTrial& trial, std::span<const CarlemanRow> rows);

}  // namespace uclab
