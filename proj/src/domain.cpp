#include "uclab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uclab/csvio.hpp"

namespace uclab {

const char* bc_name(Bc bc) {
  switch (bc) {
    case Bc::Dirichlet: return "dirichlet";
    case Bc::Neumann: return "neumann";
    case Bc::Periodic: return "periodic";
  }
  return "?";
}

char bc_letter(Bc bc) {
  switch (bc) {
    case Bc::Dirichlet: return 'D';
    case Bc::Neumann: return 'N';
    case Bc::Periodic: return 'P';
  }
  return '?';
}

Bc bc_from_name(std::string_view name) {
  if (name == "dirichlet" || name == "D") return Bc::Dirichlet;
  if (name == "neumann" || name == "N") return Bc::Neumann;
  if (name == "periodic" || name == "P") return Bc::Periodic;
  throw std::invalid_argument("unknown boundary condition '" + std::string(name) +
                              "' (expected dirichlet|neumann|periodic)");
}

Domain Domain::make(std::span<const double> lo, std::span<const double> hi,
                    std::span<const Bc> bc) {
  if (lo.size() < 1 || lo.size() > 3 || lo.size() != hi.size() || lo.size() != bc.size())
    throw std::invalid_argument("domain needs 1..3 axes with matching lo/hi/bc lists");
  Domain d;
  d.dim = static_cast<int>(lo.size());
  for (int a = 0; a < d.dim; ++a) {
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("domain axis " + std::to_string(a) +
                                  " has nonpositive length");
    d.lo[a] = lo[a];
    d.hi[a] = hi[a];
    d.bc[a] = bc[a];
  }
  return d;
}

Domain Domain::interval(double a, double b, Bc bc) {
  const double lo[1] = {a}, hi[1] = {b};
  const Bc bcs[1] = {bc};
  return make(lo, hi, bcs);
}

double Domain::min_side() const {
  double m = length(0);
  for (int a = 1; a < dim; ++a) m = std::min(m, length(a));
  return m;
}

double Domain::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= length(a);
  return v;
}

std::string Domain::bc_tag() const {
  std::string s;
  for (int a = 0; a < dim; ++a) s.push_back(bc_letter(bc[a]));
  return s;
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < domain.dim; ++a) v *= h[a];
  return v;
}

double Grid::coord(int axis, int i) const {
  switch (domain.bc[axis]) {
    case Bc::Dirichlet: return domain.lo[axis] + (i + 1) * h[axis];
    case Bc::Neumann: return domain.lo[axis] + (i + 0.5) * h[axis];
    case Bc::Periodic: return domain.lo[axis] + i * h[axis];
  }
  return 0.0;
}

std::array<int, 3> Grid::unflatten(int flat) const {
  std::array<int, 3> idx{0, 0, 0};
  idx[0] = flat % n[0];
  flat /= n[0];
  idx[1] = flat % n[1];
  idx[2] = flat / n[1];
  return idx;
}

Point Grid::node(int flat) const {
  const auto idx = unflatten(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < domain.dim; ++a) p[a] = coord(a, idx[a]);
  return p;
}

std::string Grid::id() const {
  std::string s = "bc=" + domain.bc_tag() + ";n=";
  for (int a = 0; a < domain.dim; ++a) {
    if (a) s.push_back(',');
    s += std::to_string(n[a]);
  }
  return s;
}

Grid build_grid(const Domain& domain, std::span<const int> points_per_axis) {
  if (static_cast<int>(points_per_axis.size()) != domain.dim)
    throw std::invalid_argument("points_per_axis must list one count per domain axis");
  Grid g;
  g.domain = domain;
  for (int a = 0; a < domain.dim; ++a) {
    const int n = points_per_axis[a];
    if (n < 3)
      throw std::invalid_argument("axis " + std::to_string(a) +
                                  " needs at least 3 grid points");
    g.n[a] = n;
    const double L = domain.length(a);
    g.h[a] = (domain.bc[a] == Bc::Dirichlet) ? L / (n + 1) : L / n;
  }
  return g;
}

}  // namespace uclab
