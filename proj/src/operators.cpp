#include "uclab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uclab {

Eigen::MatrixXd axis_laplacian(Bc bc, int n, double h) {
  if (n < 1 || !(h > 0.0)) throw std::invalid_argument("axis_laplacian: bad n or h");
  const double w = 1.0 / (h * h);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 2.0 * w;
    if (i > 0) a(i, i - 1) = -w;
    if (i + 1 < n) a(i, i + 1) = -w;
  }
  switch (bc) {
    case Bc::Dirichlet:
      break;  // boundary rows already eliminated
    case Bc::Neumann:
      a(0, 0) = w;
      a(n - 1, n - 1) = w;
      break;
    case Bc::Periodic:
      a(0, n - 1) += -w;
      a(n - 1, 0) += -w;
      // n == 2 would alias the wrap difference onto the inner one
      if (n < 3) throw std::invalid_argument("periodic axis needs n >= 3");
      break;
  }
  return a;
}

Eigen::MatrixXd axis_difference(Bc bc, int n, double h) {
  const double w = 1.0 / h;
  int rows = 0;
  switch (bc) {
    case Bc::Dirichlet: rows = n + 1; break;
    case Bc::Neumann: rows = n - 1; break;
    case Bc::Periodic: rows = n; break;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, n);
  switch (bc) {
    case Bc::Dirichlet:
      // differences (psi_0 - 0), (psi_1 - psi_0), ..., (0 - psi_{n-1})
      d(0, 0) = w;
      for (int i = 1; i < n; ++i) {
        d(i, i) = w;
        d(i, i - 1) = -w;
      }
      d(n, n - 1) = -w;
      break;
    case Bc::Neumann:
      for (int i = 0; i + 1 < n; ++i) {
        d(i, i) = -w;
        d(i, i + 1) = w;
      }
      break;
    case Bc::Periodic:
      for (int i = 0; i < n; ++i) {
        d(i, i) = -w;
        d(i, (i + 1) % n) = w;
      }
      break;
  }
  return d;
}

Eigen::MatrixXd assemble_laplacian(const Grid& grid) {
  const int total = grid.total();
  if (total > kDenseEigCap)
    throw std::invalid_argument("grid has " + std::to_string(total) +
                                " nodes, above the dense operator cap of " +
                                std::to_string(kDenseEigCap));
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(total, total);
  const int dim = grid.domain.dim;
  for (int a = 0; a < dim; ++a) {
    const Eigen::MatrixXd a1d = axis_laplacian(grid.domain.bc[a], grid.n[a], grid.h[a]);
    for (int flat = 0; flat < total; ++flat) {
      auto idx = grid.unflatten(flat);
      const int ia = idx[a];
      for (int ja = 0; ja < grid.n[a]; ++ja) {
        const double v = a1d(ia, ja);
        if (v == 0.0) continue;
        auto jdx = idx;
        jdx[a] = ja;
        k(flat, grid.index(jdx)) += v;
      }
    }
  }
  return k;
}

Eigen::VectorXd apply_along_axis(const Grid& grid, const Eigen::MatrixXd& m1d,
                                 int axis, const Eigen::VectorXd& in) {
  if (axis < 0 || axis >= grid.domain.dim)
    throw std::invalid_argument("apply_along_axis: axis out of range");
  if (m1d.cols() != grid.n[axis] || in.size() != grid.total())
    throw std::invalid_argument("apply_along_axis: shape mismatch");
  const int rows = static_cast<int>(m1d.rows());
  std::array<int, 3> on = grid.n;
  on[axis] = rows;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(on[0] * on[1] * on[2]);
  // strides of the input layout (axis 0 fastest)
  const std::array<int, 3> istride{1, grid.n[0], grid.n[0] * grid.n[1]};
  const std::array<int, 3> ostride{1, on[0], on[0] * on[1]};
  for (int i2 = 0; i2 < on[2]; ++i2)
    for (int i1 = 0; i1 < on[1]; ++i1)
      for (int i0 = 0; i0 < on[0]; ++i0) {
        std::array<int, 3> oid{i0, i1, i2};
        double acc = 0.0;
        std::array<int, 3> iid = oid;
        for (int j = 0; j < grid.n[axis]; ++j) {
          const double w = m1d(oid[axis], j);
          if (w == 0.0) continue;
          iid[axis] = j;
          acc += w * in[iid[0] * istride[0] + iid[1] * istride[1] + iid[2] * istride[2]];
        }
        out[i0 * ostride[0] + i1 * ostride[1] + i2 * ostride[2]] = acc;
      }
  return out;
}

Eigendecomposition eigendecompose(const Eigen::MatrixXd& sym, double cell_volume,
                                  int cap) {
  if (sym.rows() != sym.cols()) throw std::invalid_argument("eigendecompose: not square");
  if (sym.rows() > cap)
    throw std::invalid_argument("matrix dimension " + std::to_string(sym.rows()) +
                                " exceeds the dense eigensolve cap " + std::to_string(cap));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("dense symmetric eigensolve failed to converge");
  Eigendecomposition e;
  e.eigenvalues = solver.eigenvalues();
  e.eigenvectors = solver.eigenvectors();
  const double scale = 1.0 / std::sqrt(cell_volume);
  for (int j = 0; j < e.eigenvectors.cols(); ++j) {
    // sign convention: the entry of largest magnitude is positive
    int imax = 0;
    e.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    const double s = e.eigenvectors(imax, j) < 0.0 ? -scale : scale;
    e.eigenvectors.col(j) *= s;
  }
  return e;
}

DiscretizedHamiltonian::DiscretizedHamiltonian(Grid grid, Eigen::MatrixXd laplacian,
                                               Eigen::VectorXd potential)
    : grid_(std::move(grid)),
      lap_(std::move(laplacian)),
      pot_(std::move(potential)),
      cache_(std::make_shared<Cache>()) {
  if (lap_.rows() != pot_.size() || lap_.rows() != grid_.total())
    throw std::invalid_argument("hamiltonian parts disagree on dimension");
}

Eigen::MatrixXd DiscretizedHamiltonian::matrix() const {
  Eigen::MatrixXd m = lap_;
  m.diagonal() += pot_;
  return m;
}

Eigen::VectorXd DiscretizedHamiltonian::apply(const Eigen::VectorXd& x) const {
  return lap_ * x + pot_.cwiseProduct(x);
}

const Eigendecomposition& DiscretizedHamiltonian::eigensystem() const {
  if (!cache_) throw std::logic_error("empty hamiltonian");
  std::lock_guard<std::mutex> lock(cache_->m);
  if (!cache_->value)
    cache_->value = std::make_shared<const Eigendecomposition>(
        eigendecompose(matrix(), grid_.cell_volume()));
  return *cache_->value;
}

DiscretizedHamiltonian assemble_hamiltonian(const Grid& grid,
                                            const Eigen::VectorXd& potential_values) {
  if (potential_values.size() != grid.total())
    throw std::invalid_argument("potential sample count does not match grid");
  return DiscretizedHamiltonian(grid, assemble_laplacian(grid), potential_values);
}

Eigen::MatrixXd free_stiffness(const Grid& grid) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(grid.total(), grid.total());
  const int dim = grid.domain.dim;
  for (int a = 0; a < dim; ++a) {
    const Eigen::MatrixXd a1d = axis_laplacian(Bc::Neumann, grid.n[a], grid.h[a]);
    for (int flat = 0; flat < grid.total(); ++flat) {
      auto idx = grid.unflatten(flat);
      const int ia = idx[a];
      for (int ja = std::max(0, ia - 1); ja <= std::min(grid.n[a] - 1, ia + 1); ++ja) {
        const double v = a1d(ia, ja);
        if (v == 0.0) continue;
        auto jdx = idx;
        jdx[a] = ja;
        k(flat, grid.index(jdx)) += v;
      }
    }
  }
  return k;
}

double gradient_energy(const Grid& grid, const Eigen::VectorXd& psi) {
  double acc = 0.0;
  for (int a = 0; a < grid.domain.dim; ++a) {
    const Eigen::MatrixXd d = axis_difference(grid.domain.bc[a], grid.n[a], grid.h[a]);
    acc += apply_along_axis(grid, d, a, psi).squaredNorm();
  }
  return acc * grid.cell_volume();
}

double l2_norm_sq(const Grid& grid, const Eigen::VectorXd& psi) {
  return psi.squaredNorm() * grid.cell_volume();
}

}  // namespace uclab
