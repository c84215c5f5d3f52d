#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "uclab/operators.hpp"
#include "uclab/parallel.hpp"
#include "uclab/potentials.hpp"
#include "uclab/subspace.hpp"

namespace uclab {

// Spectral multiplier s_t(lambda): branches sinh(sqrt(l)t)/sqrt(l) for l > 0,
// t at l == 0, sin(sqrt(-l)t)/sqrt(-l) for l < 0. derivative_order 0..2 in t;
// order 1 gives cosh/1/cos, order 2 gives lambda * s. Near lambda * t^2 == 0
// a 3-term series avoids cancellation (threshold |lambda| t^2 < 1e-6).
// Odd orders are computed from |t| with the sign restored, so the parity
// s_{-t} == -s_t holds bit-for-bit.
double s_eval(double lambda, double t, int derivative_order = 0);

// Lift of a spectral-window function psi into one extra coordinate:
//   Psi(x, t) = sum_i c_i s_t(lambda_i) v_i(x).
// Psi(.,0) == 0 and d/dt Psi(.,0) == psi hold by construction.
struct GhostExtension {
  SubspaceFunction source;
  std::vector<double> t_grid;     // n_t symmetric nodes on [-tau, tau], t=0 included
  Eigen::MatrixXd values;         // node x t table of Psi
  double omega = 0.0;             // (1 + 2 l1 E + l1^2 + 2 l2) / 2
  double tau = 0.0;
  Eigen::VectorXd mode_eigenvalues;  // eigenvalues backing the coefficients
  std::uint64_t op_fingerprint = 0;  // identifies the eigensystem used
};

std::uint64_t eigensystem_fingerprint(const Eigendecomposition& eig);

// n_t must be odd and >= 9 so t = 0 is a node; tau > 0. Columns of the
// (node x t) table fill independently, honoring the execution mode.
GhostExtension build_extension(const SubspaceFunction& psi, const Eigendecomposition& eig,
                               double tau, int n_t, const AdmissibilityConstants& constants,
                               par::Exec exec = par::Exec::Serial);

// Pointwise-in-t defect of the slab PDE, scaled by the mass of the same time
// slice so the exponential growth toward the slab boundary neither masks nor
// inflates it. Slices carrying no mass (t = 0 by construction) are skipped.
struct PdeResidual {
  double relative_defect = 0.0;  // max over t of |H Psi - dtt Psi| / |Psi(., t)|
  double psi_norm = 0.0;         // slab L2 norm of Psi, for absolute readings
  double relative() const { return relative_defect; }
};

// Second t-derivative taken spectrally; residual is rounding-level.
PdeResidual pde_residual_spectral(const GhostExtension& ext, const DiscretizedHamiltonian& h);

// Second t-derivative by central differences on the t grid; residual is
// O(dt^2) and shrinks fourfold when n_t is doubled.
PdeResidual pde_residual_fd(const GhostExtension& ext, const DiscretizedHamiltonian& h);

struct SandwichReport {
  bool lower_ok = false;
  bool upper_ok = false;
  double lower_bound = 0.0;   // tau/2 |psi|^2
  double h1_sq = 0.0;         // integral of |Psi|^2 + |grad_x Psi|^2 + |dt Psi|^2
  double upper_bound = 0.0;   // 2 tau (1 + (1+omega) tau^2) e^{2 tau sqrt(E)} |psi|^2
  double mass_sq = 0.0;       // the |Psi|^2 part
  double grad_sq = 0.0;       // the |grad_x Psi|^2 part
  double dt_sq = 0.0;         // the |dt Psi|^2 part
};

// Slab H1 norm by trapezoid in t, stiffness quadrature in x, spectral t
// derivatives. Requires source energy E >= 0; the estimate is stated only
// there.
SandwichReport h1_norm_sandwich(const GhostExtension& ext, const Grid& grid);

struct H2Report {
  double dtt_sq = 0.0;        // |d2/dt2 Psi|^2 over the slab
  double mixed_sq = 0.0;      // |grad_x dt Psi|^2
  double spatial_sq = 0.0;    // sum over |mu| = 2 of |d^mu_x Psi|^2
  bool mixed_ok = false;      // per-t bound (2E + c) |dt Psi(.,t)|^2
  bool spatial_ok = false;    // per-t bound (8 max{|kappa|,|E|}^2 + 2 c_tilde) |Psi(.,t)|^2
  double mixed_margin = 0.0;  // min over t of bound - value (scaled)
  double spatial_margin = 0.0;
};

// Relative-bound constants that make the gradient and second-order forms
// controlled by the operator: largest eigenvalues of (K - 2H) and
// (K^2 - 4 H^2), clamped at zero. K is the grid Laplacian part of H.
struct RelativeBoundConstants {
  double c = 0.0;
  double c_tilde = 0.0;
};
RelativeBoundConstants probe_relative_constants(const DiscretizedHamiltonian& h);

// Verifies on seeded random vectors that <Kv,v> <= 2<Hv,v> + c|v|^2 and
// |Kv|^2 <= 4|Hv|^2 + c_tilde|v|^2; returns the violation count.
int count_relative_bound_violations(const DiscretizedHamiltonian& h, double c,
                                    double c_tilde, int vectors, std::uint64_t seed);

// Decomposes the slab second-derivative energy into its three summands and
// checks the two relative bounds with the supplied constants. Throws when
// the random-vector probe finds the constants invalid for this operator.
H2Report h2_decomposition(const GhostExtension& ext, const DiscretizedHamiltonian& h,
                          double c, double c_tilde);

// (x-index, t, value) rows for plotting.
std::string extension_csv(const GhostExtension& ext);

}  // namespace uclab
