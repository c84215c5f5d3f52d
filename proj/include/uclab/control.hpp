#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <span>
#include <vector>

#include "uclab/equidistributed.hpp"
#include "uclab/operators.hpp"
#include "uclab/parallel.hpp"

namespace uclab {

// Spectral heat flow e^{-t H} applied to a state vector. t must be >= 0.
Eigen::VectorXd heat_evolve(const DiscretizedHamiltonian& h, const Eigen::VectorXd& state,
                            double t);

// Steering problem: drive the truncated heat dynamics, observed through the
// equidistributed set's node weights, to zero at time T.
struct ControlProblem {
  DiscretizedHamiltonian h;
  EquidistributedSet set;
  double horizon = 1.0;            // T
  Eigen::VectorXd u0;
  double truncation_energy = 0.0;  // modes with eigenvalue <= this participate

  double kappa() const { return h.min_eigenvalue(); }
  double kappa_minus() const { return std::min(kappa(), 0.0); }
  int truncated_modes() const;
};

// W = int_0^T B(s)^T B(s) ds on the truncated modes, where B(s) applies the
// heat flow over T-s and then multiplies by sqrt of the node weights (so
// z^T W z is exactly the squared observation norm of the flowed mode mix).
// Composite Simpson in time with n_time panels; panel contributions are
// reduced with the fixed pairwise tree, so the result does not depend on the
// execution mode.
Eigen::MatrixXd gramian(const ControlProblem& problem, int n_time = 256,
                        par::Exec exec = par::Exec::Serial);

struct ControlResult {
  std::vector<double> times;     // Simpson nodes in [0, T]
  Eigen::MatrixXd trajectory;    // control values, node x time-node
  double cost = 0.0;             // L2((0,T); L2) norm of the control
  double terminal_residual = 0.0;  // |truncated u(T)| / |u0|
  double duality_gap = 0.0;        // |cost^2 - z^T W z|
  bool regularized = false;        // Gramian needed the diagonal shift
  int modes = 0;
  Eigen::VectorXd z;             // Gramian solve solution
};

// Minimal-norm control of the truncated dynamics: solve W z = -e^{-T H} u0
// (truncated), take f(s) = B(s) z. A Gramian with min eigenvalue below
// 1e-12 |W| is shifted by that amount and the result flagged.
ControlResult synthesize_control(const ControlProblem& problem, int n_time = 256,
                                 par::Exec exec = par::Exec::Serial);

struct CostBoundParams {
  double scale_constant = 1.0;  // K, calibrated
  double coarseness = 1.0;      // G
  double delta = 0.25;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double horizon = 1.0;  // T
  double kappa_minus = 0.0;
};

// (1/sqrt T) (G/d)^{K(1+G^2 l1+G^{4/3} l2^{1/3})} e^{K G^2 ln^2(G/d)/T - k_- T}
double cost_bound(const CostBoundParams& params);

// Smallest K making the bound dominate every measured (T, cost) sample at
// one fixed (G, delta) pair; K is then held fixed across sweeps.
struct CostSample {
  double horizon = 0.0;
  double cost = 0.0;
};
double calibrate_cost_constant(double coarseness, double delta, double lambda1,
                               double lambda2, double kappa_minus,
                               std::span<const CostSample> samples);

}  // namespace uclab
