#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "uclab/equidistributed.hpp"
#include "uclab/operators.hpp"

namespace uclab {

// A function from the spectral subspace up to a given energy, expanded in
// the retained eigenpairs, normalized to unit grid L2 norm.
struct SubspaceFunction {
  double energy = 0.0;
  int mode_count = 0;
  Eigen::VectorXd coefficients;  // per retained eigenpair
  Eigen::VectorXd values;        // per grid node
};

enum class SampleMode { SingleMode, RandomMix };

// SingleMode picks eigenvector mode_index among those below the energy;
// RandomMix draws seeded normal coefficients over all of them.
SubspaceFunction sample_subspace(const DiscretizedHamiltonian& h, double energy,
                                 SampleMode mode, std::uint64_t seed,
                                 int mode_index = 0);

// |psi|^2-mass fraction carried by the weighted sensor set.
double observed_ratio(const SubspaceFunction& psi, const EquidistributedSet& s,
                      const Grid& grid);

}  // namespace uclab
