#include "uclab/subspace.hpp"

#include <cmath>
#include <stdexcept>

#include "uclab/csvio.hpp"
#include "uclab/rng.hpp"

namespace uclab {

SubspaceFunction sample_subspace(const DiscretizedHamiltonian& h, double energy,
                                 SampleMode mode, std::uint64_t seed,
                                 int mode_index) {
  const auto& eig = h.eigensystem();
  int m = 0;
  while (m < eig.eigenvalues.size() && eig.eigenvalues(m) <= energy) ++m;
  if (m == 0)
    throw std::invalid_argument(
        "energy " + io::format_double(energy) +
        " lies below the ground state " + io::format_double(eig.eigenvalues(0)) +
        "; the spectral subspace is empty");

  SubspaceFunction f;
  f.energy = energy;
  f.mode_count = m;
  f.coefficients = Eigen::VectorXd::Zero(m);
  if (mode == SampleMode::SingleMode) {
    if (mode_index < 0 || mode_index >= m)
      throw std::invalid_argument("mode index " + std::to_string(mode_index) +
                                  " outside the retained range 0.." +
                                  std::to_string(m - 1));
    f.coefficients(mode_index) = 1.0;
  } else {
    rng::Stream st(seed, 0x73756273ull);
    for (int i = 0; i < m; ++i)
      f.coefficients(i) = st.normal(static_cast<std::uint64_t>(i));
    const double norm = f.coefficients.norm();
    if (norm == 0.0) throw std::runtime_error("degenerate coefficient draw");
    f.coefficients /= norm;
  }
  // eigenvectors are grid-orthonormal, so unit coefficients give unit norm
  f.values = eig.eigenvectors.leftCols(m) * f.coefficients;
  return f;
}

double observed_ratio(const SubspaceFunction& psi, const EquidistributedSet& s,
                      const Grid& grid) {
  if (psi.values.size() != grid.total() || s.node_weights.size() != grid.total())
    throw std::invalid_argument("function, set and grid disagree on node count");
  const double den = psi.values.squaredNorm();
  if (den == 0.0) throw std::invalid_argument("zero function has no mass ratio");
  const double num = s.node_weights.cwiseProduct(psi.values).dot(psi.values);
  return num / den;
}

}  // namespace uclab
