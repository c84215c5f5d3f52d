#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "uclab/domain.hpp"
#include "uclab/parallel.hpp"

namespace uclab {

enum class Placement { Center, SeededRandom, Explicit };

// One closed delta-ball per G-cell of the domain, plus per-node coverage
// weights on a grid. Weights are subsample fractions in [0,1]; the weighted
// cell volumes approximate the total measure of the union of balls.
struct EquidistributedSet {
  double G = 1.0;
  double delta = 0.1;
  std::array<int, 3> cells{1, 1, 1};
  std::vector<Point> centers;       // one per cell, axis 0 fastest
  Eigen::VectorXd node_weights;     // per grid node
  double covered_measure = 0.0;     // sum of weight * cell_volume

  double ball_volume(int dim) const;
};

// Requires 0 < delta < G/2 and at least one full G-cell per axis. Explicit
// placement validates that each supplied ball lies strictly inside its cell.
EquidistributedSet build_set(const Grid& grid, double G, double delta,
                             Placement placement, std::uint64_t seed = 0,
                             std::span<const Point> explicit_centers = {});

// Weight kernel, exposed in both execution flavours; results are bitwise
// identical. 4^dim midpoint subsamples per node cell.
Eigen::VectorXd node_weights_kernel(const Grid& grid, std::span<const Point> centers,
                                    const std::array<int, 3>& cells, double G,
                                    double delta, par::Exec exec);

}  // namespace uclab
