#include "uclab/ghost.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "uclab/csvio.hpp"
#include "uclab/rng.hpp"

namespace uclab {

double s_eval(double lambda, double t, int derivative_order) {
  if (derivative_order < 0 || derivative_order > 2)
    throw std::invalid_argument("s_eval supports derivative orders 0..2");
  if (derivative_order == 2) return lambda * s_eval(lambda, t, 0);

  // Odd orders computed from |t| with the sign restored afterwards, so the
  // parity s_{-t} == -s_t is exact and does not rely on libm symmetry.
  const double at = std::fabs(t);
  const double z = lambda * at * at;

  if (derivative_order == 0) {
    double v;
    if (std::fabs(z) < 1e-6) {
      v = at * (1.0 + z / 6.0 + z * z / 120.0);
    } else if (lambda > 0.0) {
      const double r = std::sqrt(lambda);
      v = std::sinh(r * at) / r;
    } else {
      const double r = std::sqrt(-lambda);
      v = std::sin(r * at) / r;
    }
    return t < 0.0 ? -v : v;
  }

  if (std::fabs(z) < 1e-6) return 1.0 + z / 2.0 + z * z / 24.0;
  if (lambda > 0.0) return std::cosh(std::sqrt(lambda) * at);
  return std::cos(std::sqrt(-lambda) * at);
}

std::uint64_t eigensystem_fingerprint(const Eigendecomposition& eig) {
  std::string_view bytes(reinterpret_cast<const char*>(eig.eigenvalues.data()),
                         sizeof(double) * static_cast<std::size_t>(eig.eigenvalues.size()));
  return io::fnv1a64(bytes);
}

GhostExtension build_extension(const SubspaceFunction& psi, const Eigendecomposition& eig,
                               double tau, int n_t, const AdmissibilityConstants& constants,
                               par::Exec exec) {
  if (!(tau > 0.0)) throw std::invalid_argument("extension needs tau > 0");
  if (n_t < 9 || n_t % 2 == 0)
    throw std::invalid_argument("t grid needs an odd node count >= 9");
  const int m = psi.mode_count;
  if (m <= 0 || m > eig.eigenvalues.size() || psi.coefficients.size() != m ||
      psi.values.size() != eig.eigenvectors.rows())
    throw std::invalid_argument("subspace function does not match the eigensystem");

  GhostExtension ext;
  ext.source = psi;
  ext.tau = tau;
  const double e = psi.energy;
  ext.omega = (1.0 + 2.0 * constants.lambda1 * e +
               constants.lambda1 * constants.lambda1 + 2.0 * constants.lambda2) / 2.0;
  ext.mode_eigenvalues = eig.eigenvalues.head(m);
  ext.op_fingerprint = eigensystem_fingerprint(eig);

  const int half = (n_t - 1) / 2;
  const double dt = tau / half;
  ext.t_grid.resize(n_t);
  // (i - half) negates exactly across the midpoint, so the grid is
  // symmetric bit-for-bit and t = 0 is a node.
  for (int i = 0; i < n_t; ++i) ext.t_grid[i] = (i - half) * dt;

  const auto modes = eig.eigenvectors.leftCols(m);
  ext.values.resize(modes.rows(), n_t);
  par::run_indexed(exec, n_t, [&](std::int64_t j) {
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i)
      w[i] = psi.coefficients[i] * s_eval(ext.mode_eigenvalues[i], ext.t_grid[j], 0);
    ext.values.col(j) = modes * w;
  });
  return ext;
}

namespace {

Eigen::VectorXd mode_coeffs(const GhostExtension& ext, double t, int order) {
  const int m = ext.source.mode_count;
  Eigen::VectorXd w(m);
  for (int i = 0; i < m; ++i)
    w[i] = ext.source.coefficients[i] * s_eval(ext.mode_eigenvalues[i], t, order);
  return w;
}

std::vector<double> trapezoid_weights(const std::vector<double>& t) {
  const std::size_t n = t.size();
  const double dt = t[1] - t[0];
  std::vector<double> w(n, dt);
  w.front() = dt / 2.0;
  w.back() = dt / 2.0;
  return w;
}

const Eigendecomposition& require_same_operator(const GhostExtension& ext,
                                                const DiscretizedHamiltonian& h) {
  const Eigendecomposition& eig = h.eigensystem();
  if (eigensystem_fingerprint(eig) != ext.op_fingerprint ||
      h.dimension() != ext.values.rows())
    throw std::invalid_argument("extension was built from a different operator");
  return eig;
}

double slab_norm(const GhostExtension& ext, double cell_volume) {
  const auto tw = trapezoid_weights(ext.t_grid);
  double acc = 0.0;
  for (std::size_t j = 0; j < tw.size(); ++j)
    acc += tw[j] * ext.values.col(static_cast<int>(j)).squaredNorm() * cell_volume;
  return std::sqrt(acc);
}

}  // namespace

namespace {

// Per-slice scaling keeps the defect comparable across the slab: the grid
// volume factor cancels, and slices below the mass floor (t = 0 exactly, by
// oddness of the profile) carry no information about the PDE.
double peak_column_norm(const GhostExtension& ext) {
  double peak = 0.0;
  for (int j = 0; j < ext.values.cols(); ++j)
    peak = std::max(peak, ext.values.col(j).norm());
  return peak;
}

}  // namespace

PdeResidual pde_residual_spectral(const GhostExtension& ext, const DiscretizedHamiltonian& h) {
  const Eigendecomposition& eig = require_same_operator(ext, h);
  const auto modes = eig.eigenvectors.leftCols(ext.source.mode_count);
  const double floor = 1e-14 * peak_column_norm(ext);
  PdeResidual r;
  for (std::size_t j = 0; j < ext.t_grid.size(); ++j) {
    const Eigen::VectorXd col = ext.values.col(static_cast<int>(j));
    const double mass = col.norm();
    if (mass <= floor) continue;
    const Eigen::VectorXd dtt = modes * mode_coeffs(ext, ext.t_grid[j], 2);
    r.relative_defect = std::max(r.relative_defect, (h.apply(col) - dtt).norm() / mass);
  }
  r.psi_norm = slab_norm(ext, h.grid().cell_volume());
  return r;
}

PdeResidual pde_residual_fd(const GhostExtension& ext, const DiscretizedHamiltonian& h) {
  require_same_operator(ext, h);
  const double floor = 1e-14 * peak_column_norm(ext);
  const double dt = ext.t_grid[1] - ext.t_grid[0];
  PdeResidual r;
  for (int j = 1; j + 1 < static_cast<int>(ext.t_grid.size()); ++j) {
    const Eigen::VectorXd col = ext.values.col(j);
    const double mass = col.norm();
    if (mass <= floor) continue;
    const Eigen::VectorXd dtt =
        (ext.values.col(j + 1) - 2.0 * col + ext.values.col(j - 1)) / (dt * dt);
    r.relative_defect = std::max(r.relative_defect, (h.apply(col) - dtt).norm() / mass);
  }
  r.psi_norm = slab_norm(ext, h.grid().cell_volume());
  return r;
}

SandwichReport h1_norm_sandwich(const GhostExtension& ext, const Grid& grid) {
  // The slab table retains no grid of its own, but its source slice is unit
  // mass on the grid it was built from; a grid with a different node count
  // or cell volume breaks that invariant.
  if (grid.total() != ext.values.rows() ||
      std::abs(l2_norm_sq(grid, ext.source.values) - 1.0) > 1e-6)
    throw std::invalid_argument("grid does not match the extension");
  const double e = ext.source.energy;
  if (e < 0.0)
    throw std::invalid_argument("slab H1 estimate requires a nonnegative energy window");

  const auto tw = trapezoid_weights(ext.t_grid);
  SandwichReport rep;
  for (std::size_t j = 0; j < tw.size(); ++j) {
    const Eigen::VectorXd col = ext.values.col(static_cast<int>(j));
    rep.mass_sq += tw[j] * l2_norm_sq(grid, col);
    rep.grad_sq += tw[j] * gradient_energy(grid, col);
    rep.dt_sq += tw[j] * mode_coeffs(ext, ext.t_grid[j], 1).squaredNorm();
  }
  rep.h1_sq = rep.mass_sq + rep.grad_sq + rep.dt_sq;

  const double psi_sq = ext.source.coefficients.squaredNorm();
  const double tau = ext.tau;
  rep.lower_bound = tau / 2.0 * psi_sq;
  rep.upper_bound = 2.0 * tau * (1.0 + (1.0 + ext.omega) * tau * tau) *
                    std::exp(2.0 * tau * std::sqrt(e)) * psi_sq;
  rep.lower_ok = rep.h1_sq >= rep.lower_bound * (1.0 - 1e-12);
  rep.upper_ok = rep.h1_sq <= rep.upper_bound * (1.0 + 1e-12);
  return rep;
}

RelativeBoundConstants probe_relative_constants(const DiscretizedHamiltonian& h) {
  const Eigen::MatrixXd k = h.laplacian();
  const Eigen::MatrixXd hm = h.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> grad_gap(k - 2.0 * hm,
                                                          Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> curv_gap(k * k - 4.0 * hm * hm,
                                                          Eigen::EigenvaluesOnly);
  RelativeBoundConstants r;
  r.c = std::max(0.0, grad_gap.eigenvalues().maxCoeff());
  r.c_tilde = std::max(0.0, curv_gap.eigenvalues().maxCoeff());
  return r;
}

int count_relative_bound_violations(const DiscretizedHamiltonian& h, double c,
                                    double c_tilde, int vectors, std::uint64_t seed) {
  const Eigen::MatrixXd& k = h.laplacian();
  int bad = 0;
  for (int v = 0; v < vectors; ++v) {
    rng::Sequence seq(seed, 0x68326272ull + static_cast<std::uint64_t>(v));
    Eigen::VectorXd x(h.dimension());
    for (int i = 0; i < x.size(); ++i) x[i] = seq.next_normal();
    const Eigen::VectorXd kx = k * x;
    const Eigen::VectorXd hx = h.apply(x);
    const double xx = x.squaredNorm();
    const double kq = x.dot(kx);
    const double hq = x.dot(hx);
    if (kq > 2.0 * hq + c * xx + 1e-9 * (std::fabs(kq) + std::fabs(hq) + xx)) ++bad;
    const double lhs = kx.squaredNorm();
    const double rhs = 4.0 * hx.squaredNorm() + c_tilde * xx;
    if (lhs > rhs + 1e-9 * (lhs + rhs)) ++bad;
  }
  return bad;
}

H2Report h2_decomposition(const GhostExtension& ext, const DiscretizedHamiltonian& h,
                          double c, double c_tilde) {
  const Eigendecomposition& eig = require_same_operator(ext, h);
  if (count_relative_bound_violations(h, c, c_tilde, 64, 0x70726f62ull) > 0)
    throw std::invalid_argument(
        "relative bound constants fail the random-vector probe for this operator");

  const Grid& grid = h.grid();
  const double cv = grid.cell_volume();
  const int dim = grid.domain.dim;
  const auto modes = eig.eigenvectors.leftCols(ext.source.mode_count);

  std::vector<Eigen::MatrixXd> lap1d(dim), diff1d(dim);
  std::vector<Grid> diff_grid(dim);  // extents after one difference along axis a
  for (int a = 0; a < dim; ++a) {
    lap1d[a] = axis_laplacian(grid.domain.bc[a], grid.n[a], grid.h[a]);
    diff1d[a] = axis_difference(grid.domain.bc[a], grid.n[a], grid.h[a]);
    diff_grid[a] = grid;
    diff_grid[a].n[a] = static_cast<int>(diff1d[a].rows());
  }

  const double e = ext.source.energy;
  const double kappa = eig.eigenvalues(0);
  const double spectral_radius = std::max(std::fabs(kappa), std::fabs(e));
  const double mixed_const = 2.0 * e + c;
  const double spatial_const = 8.0 * spectral_radius * spectral_radius + 2.0 * c_tilde;

  const auto tw = trapezoid_weights(ext.t_grid);
  H2Report rep;
  rep.mixed_ok = rep.spatial_ok = true;
  rep.mixed_margin = rep.spatial_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < tw.size(); ++j) {
    const double t = ext.t_grid[j];
    const Eigen::VectorXd col = ext.values.col(static_cast<int>(j));

    const double dtt_t = mode_coeffs(ext, t, 2).squaredNorm();

    const Eigen::VectorXd dt_coeffs = mode_coeffs(ext, t, 1);
    const Eigen::VectorXd dt_vals = modes * dt_coeffs;
    const double mixed_t = gradient_energy(grid, dt_vals);
    const double dt_mass = dt_coeffs.squaredNorm();

    double spatial_t = 0.0;
    for (int a = 0; a < dim; ++a)
      spatial_t += apply_along_axis(grid, lap1d[a], a, col).squaredNorm() * cv;
    for (int a = 0; a < dim; ++a)
      for (int b = a + 1; b < dim; ++b) {
        const Eigen::VectorXd da = apply_along_axis(grid, diff1d[a], a, col);
        spatial_t += 2.0 * apply_along_axis(diff_grid[a], diff1d[b], b, da).squaredNorm() * cv;
      }
    const double mass_t = col.squaredNorm() * cv;

    rep.dtt_sq += tw[j] * dtt_t;
    rep.mixed_sq += tw[j] * mixed_t;
    rep.spatial_sq += tw[j] * spatial_t;

    const double mslack = 1e-9 * (mixed_t + mixed_const * dt_mass + 1.0);
    const double mmargin = mixed_const * dt_mass + mslack - mixed_t;
    if (mmargin < 0.0) rep.mixed_ok = false;
    rep.mixed_margin = std::min(rep.mixed_margin, mmargin);

    const double sslack = 1e-9 * (spatial_t + spatial_const * mass_t + 1.0);
    const double smargin = spatial_const * mass_t + sslack - spatial_t;
    if (smargin < 0.0) rep.spatial_ok = false;
    rep.spatial_margin = std::min(rep.spatial_margin, smargin);
  }
  return rep;
}

std::string extension_csv(const GhostExtension& ext) {
  io::Table table;
  table.set_header({"node", "t", "value"});
  for (int j = 0; j < static_cast<int>(ext.t_grid.size()); ++j)
    for (int i = 0; i < ext.values.rows(); ++i)
      table.add_row({io::format_int(i), io::format_double(ext.t_grid[j]),
                     io::format_double(ext.values(i, j))});
  return table.to_delimited(',');
}

}  // namespace uclab
