#pragma once

#include <Eigen/Dense>
#include <memory>
#include <mutex>

#include "uclab/domain.hpp"

namespace uclab {

// Dense symmetric eigensolves are capped; larger problems are out of scope
// for this laboratory and must be rejected rather than attempted.
inline constexpr int kDenseEigCap = 6000;

// 1D second-difference matrix, positive semidefinite, scaled by 1/h^2.
Eigen::MatrixXd axis_laplacian(Bc bc, int n, double h);

// First-difference factor D with D^T D == axis_laplacian(bc, n, h).
// Row counts: Dirichlet n+1 (differences to the eliminated boundary),
// Neumann n-1, Periodic n (wrap-around difference included).
Eigen::MatrixXd axis_difference(Bc bc, int n, double h);

// Tensor-sum Laplacian of the grid, dense.
Eigen::MatrixXd assemble_laplacian(const Grid& grid);

// out = (I (x) M (x) I) in, applying the 1D operator M along one axis.
// M must have grid.n[axis] columns; its row count may differ, in which case
// the output lives on the grid with n[axis] replaced by M.rows().
Eigen::VectorXd apply_along_axis(const Grid& grid, const Eigen::MatrixXd& m1d,
                                 int axis, const Eigen::VectorXd& in);

struct Eigendecomposition {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // columns; cell_volume * v^T v == 1
};

// Ascending eigenpairs of a symmetric matrix, vectors normalized in the
// grid L2 inner product (weight cell_volume) with a deterministic sign
// convention. Throws when the dimension exceeds the dense cap.
Eigendecomposition eigendecompose(const Eigen::MatrixXd& sym, double cell_volume,
                                  int cap = kDenseEigCap);

class DiscretizedHamiltonian {
 public:
  DiscretizedHamiltonian() = default;
  DiscretizedHamiltonian(Grid grid, Eigen::MatrixXd laplacian, Eigen::VectorXd potential);

  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& laplacian() const { return lap_; }
  const Eigen::VectorXd& potential() const { return pot_; }
  int dimension() const { return static_cast<int>(pot_.size()); }

  Eigen::MatrixXd matrix() const;  // laplacian + diag(potential)
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  // Lazy, cached, safe for concurrent readers. First call pays the solve.
  const Eigendecomposition& eigensystem() const;
  double min_eigenvalue() const { return eigensystem().eigenvalues(0); }

 private:
  struct Cache {
    std::mutex m;
    std::shared_ptr<const Eigendecomposition> value;
  };
  Grid grid_;
  Eigen::MatrixXd lap_;
  Eigen::VectorXd pot_;
  std::shared_ptr<Cache> cache_;
};

// potential_values: one sample per grid node, flat ordering.
DiscretizedHamiltonian assemble_hamiltonian(const Grid& grid,
                                            const Eigen::VectorXd& potential_values);

// Stiffness of the grid with natural (Neumann) boundary behaviour on every
// axis. psi^T K psi underestimates the quadratic form of any of the three
// boundary conditions, which is what admissibility estimation needs.
Eigen::MatrixXd free_stiffness(const Grid& grid);

// cell_volume * psi^T K_bc psi with the grid's own boundary conditions.
double gradient_energy(const Grid& grid, const Eigen::VectorXd& psi);

// cell_volume * psi^T psi
double l2_norm_sq(const Grid& grid, const Eigen::VectorXd& psi);

}  // namespace uclab
