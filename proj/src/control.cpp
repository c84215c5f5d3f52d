#include "uclab/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace uclab {
namespace {

// Simpson nodes and weights on [0, T]. Panel count must be even so the rule
// closes; callers see the same node list the Gramian integrated over.
struct TimeRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

TimeRule simpson_rule(double horizon, int n_time) {
  if (n_time < 2 || n_time % 2 != 0)
    throw std::invalid_argument("time quadrature needs an even panel count of at least 2");
  TimeRule rule;
  rule.nodes.resize(n_time + 1);
  rule.weights.resize(n_time + 1);
  const double dt = horizon / n_time;
  for (int k = 0; k <= n_time; ++k) {
    rule.nodes[k] = horizon * k / n_time;
    double c = (k == 0 || k == n_time) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    rule.weights[k] = c * dt / 3.0;
  }
  return rule;
}

struct TruncatedBasis {
  int m = 0;
  Eigen::MatrixXd modes;        // node x m
  Eigen::VectorXd eigenvalues;  // m
};

TruncatedBasis truncate(const ControlProblem& problem) {
  const Eigendecomposition& eig = problem.h.eigensystem();
  int m = 0;
  while (m < eig.eigenvalues.size() && eig.eigenvalues(m) <= problem.truncation_energy) ++m;
  if (m == 0) throw std::invalid_argument("the truncation energy excludes every mode");
  TruncatedBasis basis;
  basis.m = m;
  basis.modes = eig.eigenvectors.leftCols(m);
  basis.eigenvalues = eig.eigenvalues.head(m);
  return basis;
}

void check_problem(const ControlProblem& problem) {
  if (!(problem.horizon > 0.0)) throw std::invalid_argument("control horizon must be positive");
  if (problem.set.node_weights.size() != problem.h.dimension())
    throw std::invalid_argument("observation weights do not match the operator grid");
  if (problem.u0.size() != problem.h.dimension())
    throw std::invalid_argument("initial state does not match the operator grid");
}

// flow(k, i) = exp(-lambda_i (T - s_k))
Eigen::MatrixXd flow_factors(const TimeRule& rule, const Eigen::VectorXd& eigenvalues,
                             double horizon) {
  Eigen::MatrixXd flow(rule.nodes.size(), eigenvalues.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
    for (int i = 0; i < eigenvalues.size(); ++i)
      flow(k, i) = std::exp(-eigenvalues(i) * (horizon - rule.nodes[k]));
  return flow;
}

Eigen::MatrixXd gramian_impl(const ControlProblem& problem, const TruncatedBasis& basis,
                             const TimeRule& rule, const Eigen::MatrixXd& flow,
                             par::Exec exec) {
  const double cv = problem.h.grid().cell_volume();
  // Weighted mode overlaps: S_ij = cv * sum_n w_n v_i(n) v_j(n).
  Eigen::MatrixXd weighted =
      basis.modes.array().colwise() * problem.set.node_weights.array();
  Eigen::MatrixXd overlap = cv * (basis.modes.transpose() * weighted.matrix());

  const int m = basis.m;
  const int n_nodes = static_cast<int>(rule.nodes.size());
  const std::int64_t entries = static_cast<std::int64_t>(m) * (m + 1) / 2;
  Eigen::MatrixXd w(m, m);
  par::run_indexed(exec, entries, [&](std::int64_t e) {
    // Unrank the upper-triangle entry (row-major over i <= j).
    int i = 0;
    std::int64_t rem = e;
    while (rem >= m - i) {
      rem -= m - i;
      ++i;
    }
    const int j = i + static_cast<int>(rem);
    std::vector<double> panel(n_nodes);
    for (int k = 0; k < n_nodes; ++k) panel[k] = rule.weights[k] * flow(k, i) * flow(k, j);
    const double quad = par::pairwise_sum(panel);
    w(i, j) = overlap(i, j) * quad;
    w(j, i) = w(i, j);
  });
  return w;
}

}  // namespace

int ControlProblem::truncated_modes() const {
  const Eigen::VectorXd& ev = h.eigensystem().eigenvalues;
  int m = 0;
  while (m < ev.size() && ev(m) <= truncation_energy) ++m;
  return m;
}

Eigen::VectorXd heat_evolve(const DiscretizedHamiltonian& h, const Eigen::VectorXd& state,
                            double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat flow requires a nonnegative time");
  if (state.size() != h.dimension())
    throw std::invalid_argument("state does not match the operator grid");
  const Eigendecomposition& eig = h.eigensystem();
  const double cv = h.grid().cell_volume();
  Eigen::VectorXd coeffs = cv * (eig.eigenvectors.transpose() * state);
  coeffs.array() *= (-eig.eigenvalues.array() * t).exp();
  return eig.eigenvectors * coeffs;
}

Eigen::MatrixXd gramian(const ControlProblem& problem, int n_time, par::Exec exec) {
  check_problem(problem);
  const TruncatedBasis basis = truncate(problem);
  const TimeRule rule = simpson_rule(problem.horizon, n_time);
  const Eigen::MatrixXd flow = flow_factors(rule, basis.eigenvalues, problem.horizon);
  return gramian_impl(problem, basis, rule, flow, exec);
}

ControlResult synthesize_control(const ControlProblem& problem, int n_time, par::Exec exec) {
  check_problem(problem);
  const double cv = problem.h.grid().cell_volume();
  const double u0_norm = std::sqrt(cv) * problem.u0.norm();
  if (!(u0_norm > 0.0)) throw std::invalid_argument("initial state must be nonzero");

  const TruncatedBasis basis = truncate(problem);
  const TimeRule rule = simpson_rule(problem.horizon, n_time);
  const Eigen::MatrixXd flow = flow_factors(rule, basis.eigenvalues, problem.horizon);
  const Eigen::MatrixXd w = gramian_impl(problem, basis, rule, flow, exec);

  // Free terminal coefficients of the truncated dynamics.
  Eigen::VectorXd a = cv * (basis.modes.transpose() * problem.u0);
  Eigen::VectorXd c0 =
      (-basis.eigenvalues.array() * problem.horizon).exp() * a.array();

  ControlResult result;
  result.modes = basis.m;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> wies(w, Eigen::EigenvaluesOnly);
  const double w_norm = wies.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::MatrixXd w_solve = w;
  if (wies.eigenvalues().minCoeff() < 1e-12 * w_norm) {
    w_solve.diagonal().array() += 1e-12 * w_norm;
    result.regularized = true;
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(w_solve);
  Eigen::VectorXd z = ldlt.solve(-c0);
  // One refinement pass tightens the terminal residual well below spec.
  z += ldlt.solve(-c0 - w_solve * z);
  result.z = z;

  const int n_nodes = static_cast<int>(rule.nodes.size());
  result.times = rule.nodes;
  result.trajectory.resize(problem.h.dimension(), n_nodes);
  Eigen::VectorXd sqrt_w = problem.set.node_weights.cwiseSqrt();
  std::vector<double> cost_panel(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    Eigen::VectorXd mixed = flow.row(k).transpose().cwiseProduct(z);
    result.trajectory.col(k) = sqrt_w.cwiseProduct(basis.modes * mixed);
    cost_panel[k] = rule.weights[k] * cv * result.trajectory.col(k).squaredNorm();
  }
  const double cost_sq = par::pairwise_sum(cost_panel);
  result.cost = std::sqrt(std::max(0.0, cost_sq));
  result.duality_gap = std::abs(cost_sq - double(z.transpose() * w * z));
  result.terminal_residual = (c0 + w * z).norm() / u0_norm;
  return result;
}

double cost_bound(const CostBoundParams& params) {
  if (!(params.horizon > 0.0)) throw std::invalid_argument("cost bound needs a positive horizon");
  if (!(params.scale_constant > 0.0))
    throw std::invalid_argument("cost bound needs a positive calibration constant");
  if (!(params.delta > 0.0 && params.delta < 0.5 * params.coarseness))
    throw std::invalid_argument("cost bound needs 0 < delta < G/2");
  if (params.lambda1 < 0.0 || params.lambda2 < 0.0)
    throw std::invalid_argument("cost bound needs nonnegative potential constants");
  if (params.kappa_minus > 0.0)
    throw std::invalid_argument("kappa_minus is the negative part and must be <= 0");
  const double g = params.coarseness;
  const double ratio = g / params.delta;
  const double log_ratio = std::log(ratio);
  const double prefactor =
      1.0 + g * g * params.lambda1 + std::cbrt(g * g * g * g * params.lambda2);
  const double k = params.scale_constant;
  return std::pow(ratio, k * prefactor) *
         std::exp(k * g * g * log_ratio * log_ratio / params.horizon -
                  params.kappa_minus * params.horizon) /
         std::sqrt(params.horizon);
}

double calibrate_cost_constant(double coarseness, double delta, double lambda1,
                               double lambda2, double kappa_minus,
                               std::span<const CostSample> samples) {
  if (samples.empty()) throw std::invalid_argument("calibration needs at least one cost sample");
  if (!(delta > 0.0 && delta < 0.5 * coarseness))
    throw std::invalid_argument("calibration needs 0 < delta < G/2");
  const double g = coarseness;
  const double log_ratio = std::log(g / delta);
  const double prefactor = 1.0 + g * g * lambda1 + std::cbrt(g * g * g * g * lambda2);
  double k = 0.0;
  for (const CostSample& s : samples) {
    if (!(s.horizon > 0.0 && s.cost > 0.0))
      throw std::invalid_argument("cost samples need positive horizon and cost");
    const double needed = (std::log(s.cost) + 0.5 * std::log(s.horizon) +
                           kappa_minus * s.horizon) /
                          (prefactor * log_ratio + g * g * log_ratio * log_ratio / s.horizon);
    k = std::max(k, needed);
  }
  // The bound is increasing in the constant, so any positive floor stays valid
  // when every sample is already dominated at K -> 0.
  return std::max(k, 1e-9);
}

}  // namespace uclab
