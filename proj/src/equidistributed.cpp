#include "uclab/equidistributed.hpp"

#include <cmath>
#include <stdexcept>

#include "uclab/rng.hpp"

namespace uclab {

double EquidistributedSet::ball_volume(int dim) const {
  switch (dim) {
    case 1: return 2.0 * delta;
    case 2: return M_PI * delta * delta;
    case 3: return 4.0 / 3.0 * M_PI * delta * delta * delta;
  }
  throw std::invalid_argument("dimension must be 1..3");
}

Eigen::VectorXd node_weights_kernel(const Grid& grid, std::span<const Point> centers,
                                    const std::array<int, 3>& cells, double G,
                                    double delta, par::Exec exec) {
  const int dim = grid.domain.dim;
  const int total = grid.total();
  int sub = 1;
  for (int a = 0; a < dim; ++a) sub *= 4;
  const double d2 = delta * delta;
  Eigen::VectorXd w(total);
  par::run_indexed(exec, total, [&](std::int64_t flat) {
    const Point p = grid.node(static_cast<int>(flat));
    int hit = 0;
    for (int k = 0; k < sub; ++k) {
      Point q = p;
      int kk = k;
      for (int a = 0; a < dim; ++a) {
        q[a] += ((kk % 4 + 0.5) / 4.0 - 0.5) * grid.h[a];
        kk /= 4;
      }
      // A ball is strictly inside its cell, so only the cell containing q
      // can cover it.
      long long cell = 0;
      long long stride = 1;
      bool inside = true;
      for (int a = 0; a < dim; ++a) {
        const int j = static_cast<int>(std::floor((q[a] - grid.domain.lo[a]) / G));
        if (j < 0 || j >= cells[a]) {
          inside = false;
          break;
        }
        cell += j * stride;
        stride *= cells[a];
      }
      if (!inside) continue;
      const Point& c = centers[static_cast<std::size_t>(cell)];
      double r2 = 0.0;
      for (int a = 0; a < dim; ++a) {
        const double d = q[a] - c[a];
        r2 += d * d;
      }
      if (r2 <= d2) ++hit;
    }
    w[flat] = static_cast<double>(hit) / sub;
  });
  return w;
}

EquidistributedSet build_set(const Grid& grid, double G, double delta,
                             Placement placement, std::uint64_t seed,
                             std::span<const Point> explicit_centers) {
  const int dim = grid.domain.dim;
  if (!(G > 0.0)) throw std::invalid_argument("cell size G must be positive");
  if (!(delta > 0.0 && delta < 0.5 * G))
    throw std::invalid_argument("ball radius must satisfy 0 < delta < G/2");

  EquidistributedSet s;
  s.G = G;
  s.delta = delta;
  long long ncells = 1;
  for (int a = 0; a < dim; ++a) {
    const int m = static_cast<int>(std::floor(grid.domain.length(a) / G + 1e-12));
    if (m < 1)
      throw std::invalid_argument("cell size G exceeds the domain side on axis " +
                                  std::to_string(a));
    s.cells[a] = m;
    ncells *= m;
  }

  s.centers.resize(static_cast<std::size_t>(ncells));
  if (placement == Placement::Explicit) {
    if (static_cast<long long>(explicit_centers.size()) != ncells)
      throw std::invalid_argument("need exactly one center per cell, got " +
                                  std::to_string(explicit_centers.size()));
  }
  rng::Stream st(seed, 0x65717365ull);
  const double margin = 1e-9 * G;
  for (long long flat = 0; flat < ncells; ++flat) {
    long long kk = flat;
    std::array<int, 3> j{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      j[a] = static_cast<int>(kk % s.cells[a]);
      kk /= s.cells[a];
    }
    Point c{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      const double cell_lo = grid.domain.lo[a] + j[a] * G;
      switch (placement) {
        case Placement::Center:
          c[a] = cell_lo + 0.5 * G;
          break;
        case Placement::SeededRandom:
          c[a] = cell_lo + delta + margin +
                 st.uniform01(static_cast<std::uint64_t>(flat) * 3 + a) *
                     (G - 2.0 * (delta + margin));
          break;
        case Placement::Explicit: {
          c[a] = explicit_centers[static_cast<std::size_t>(flat)][a];
          if (!(c[a] - delta > cell_lo && c[a] + delta < cell_lo + G))
            throw std::invalid_argument(
                "explicit ball " + std::to_string(flat) +
                " is not strictly inside its cell on axis " + std::to_string(a));
          break;
        }
      }
    }
    s.centers[static_cast<std::size_t>(flat)] = c;
  }

  s.node_weights = node_weights_kernel(grid, s.centers, s.cells, G, delta,
                                       par::Exec::OpenMP);
  s.covered_measure = s.node_weights.sum() * grid.cell_volume();
  return s;
}

}  // namespace uclab
