#pragma once

#include <array>
#include <span>
#include <string>

namespace uclab {

enum class Bc { Dirichlet, Neumann, Periodic };

const char* bc_name(Bc bc);
char bc_letter(Bc bc);
Bc bc_from_name(std::string_view name);

using Point = std::array<double, 3>;

// Axis-aligned open box in up to three dimensions with one boundary
// condition per axis. Unused axes keep the defaults and are ignored.
struct Domain {
  int dim = 1;
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> hi{1.0, 1.0, 1.0};
  std::array<Bc, 3> bc{Bc::Dirichlet, Bc::Dirichlet, Bc::Dirichlet};

  static Domain make(std::span<const double> lo, std::span<const double> hi,
                     std::span<const Bc> bc);
  static Domain interval(double a, double b, Bc bc);

  double length(int axis) const { return hi[axis] - lo[axis]; }
  double min_side() const;
  double volume() const;
  std::string bc_tag() const;  // e.g. "DN" for Dirichlet x Neumann
};

// Tensor grid on a Domain. Node layout per axis:
//   Dirichlet: h = L/(n+1), nodes at lo + (i+1)h   (boundary rows eliminated)
//   Neumann:   h = L/n,     nodes at lo + (i+0.5)h (cell centers)
//   Periodic:  h = L/n,     nodes at lo + i h      (right endpoint identified)
struct Grid {
  Domain domain;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> h{0.0, 0.0, 0.0};

  int total() const { return n[0] * n[1] * n[2]; }
  double cell_volume() const;
  double coord(int axis, int i) const;
  int index(const std::array<int, 3>& idx) const {
    return idx[0] + n[0] * (idx[1] + n[1] * idx[2]);
  }
  std::array<int, 3> unflatten(int flat) const;
  Point node(int flat) const;
  std::string id() const;
};

// Validates and builds the grid; points_per_axis must give one entry per
// domain axis, each at least 3.
Grid build_grid(const Domain& domain, std::span<const int> points_per_axis);

}  // namespace uclab
