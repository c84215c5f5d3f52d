#include "uclab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "uclab/operators.hpp"
#include "uclab/rng.hpp"

namespace uclab {

namespace {

double free_gradient_form(const Grid& grid, const Eigen::VectorXd& psi) {
  double acc = 0.0;
  for (int a = 0; a < grid.domain.dim; ++a) {
    const Eigen::MatrixXd d = axis_difference(Bc::Neumann, grid.n[a], grid.h[a]);
    acc += apply_along_axis(grid, d, a, psi).squaredNorm();
  }
  return acc;
}

}  // namespace

AdmissibilityConstants subclass_constants(const SubclassScaling& s, double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("subclass scaling needs epsilon in (0,1]");
  if (s.a < 0.0 || s.b < 0.0)
    throw std::invalid_argument("subclass scaling needs a, b >= 0");
  return {s.a * epsilon, s.a / epsilon + s.b,
          AdmissibilityConstants::Provenance::Analytic, ""};
}

AdmissibilityConstants restriction_constants(double lambda1, double lambda2,
                                             double L0, int dim) {
  if (!(L0 > 0.0)) throw std::invalid_argument("restriction constants need L0 > 0");
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1..3");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("form-bound constants must be nonnegative");
  double p3 = 1.0;
  for (int a = 0; a < dim; ++a) p3 *= 3.0;
  return {2.0 * p3 * lambda1, p3 * (8.0 * lambda1 / (L0 * L0) + lambda2),
          AdmissibilityConstants::Provenance::Analytic, ""};
}

double SiteShape::eval(const Point& offset, int dim) const {
  if (kind == Kind::CellIndicator) return amplitude;
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) {
    const double d = offset[a] - 0.5;
    r2 += d * d;
  }
  const double s = 1.0 - r2 / (radius * radius);
  return s > 0.0 ? amplitude * s * s : 0.0;
}

Potential Potential::zero(int dim) { return constant(dim, 0.0); }

Potential Potential::constant(int dim, double value) {
  Potential p = bounded(dim, value == 0.0 ? "zero" : "const",
                        [value](const Point&) { return value; }, std::abs(value));
  return p;
}

Potential Potential::bounded(int dim, std::string name,
                             std::function<double(const Point&)> f, double sup_norm) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1..3");
  if (!(sup_norm >= 0.0)) throw std::invalid_argument("sup bound must be >= 0");
  Potential p;
  p.kind_ = Kind::Bounded;
  p.dim_ = dim;
  p.name_ = std::move(name);
  auto part = std::make_shared<BoundedPart>();
  part->f = std::move(f);
  part->sup_norm = sup_norm;
  p.bounded_ = part;
  return p;
}

Potential Potential::power_singularity(int dim, Point center, double gamma, double cap) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1..3");
  const double limit = dim == 1 ? 0.5 : 1.0;
  if (!(gamma > 0.0) || gamma >= limit)
    throw std::invalid_argument("singularity exponent must lie in (0," +
                                std::string(dim == 1 ? "0.5" : "1") +
                                ") for dimension " + std::to_string(dim));
  if (!(cap > 0.0)) throw std::invalid_argument("pointwise cap must be positive");
  Potential p;
  p.kind_ = Kind::PowerSingularity;
  p.dim_ = dim;
  p.name_ = "power";
  auto part = std::make_shared<PowerPart>();
  part->center = center;
  part->gamma = gamma;
  part->cap = cap;
  p.power_ = part;
  return p;
}

Potential Potential::random_sample(int dim, RandomSampleSpec spec) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1..3");
  long long cells = 1;
  for (int a = 0; a < dim; ++a) {
    if (spec.cells[a] < 1) throw std::invalid_argument("cell counts must be >= 1");
    cells *= spec.cells[a];
  }
  if (static_cast<long long>(spec.couplings.size()) != cells)
    throw std::invalid_argument("coupling count does not match the cell lattice");
  for (double w : spec.couplings)
    if (!(w >= 0.0 && w <= 1.0))
      throw std::invalid_argument("couplings must lie in [0,1]");
  Potential p;
  p.kind_ = Kind::RandomSample;
  p.dim_ = dim;
  p.name_ = "random";
  p.random_ = std::make_shared<const RandomSampleSpec>(std::move(spec));
  return p;
}

Potential Potential::sum(std::vector<Potential> parts) {
  if (parts.empty()) throw std::invalid_argument("sum needs at least one part");
  const int dim = parts.front().dim_;
  std::string name;
  for (const auto& q : parts) {
    if (q.dim_ != dim) throw std::invalid_argument("sum parts disagree on dimension");
    if (!name.empty()) name.push_back('+');
    name += q.name_;
  }
  Potential p;
  p.kind_ = Kind::Sum;
  p.dim_ = dim;
  p.name_ = std::move(name);
  p.parts_ = std::make_shared<const std::vector<Potential>>(std::move(parts));
  return p;
}

bool Potential::is_singular() const {
  switch (kind_) {
    case Kind::PowerSingularity: return true;
    case Kind::Sum:
      for (const auto& q : *parts_)
        if (q.is_singular()) return true;
      return false;
    default: return false;
  }
}

std::optional<double> Potential::sup_bound() const {
  switch (kind_) {
    case Kind::Bounded: return bounded_->sup_norm;
    case Kind::RandomSample: return random_->shape.sup();
    case Kind::PowerSingularity: return std::nullopt;
    case Kind::Sum: {
      double s = 0.0;
      for (const auto& q : *parts_) {
        const auto b = q.sup_bound();
        if (!b) return std::nullopt;
        s += *b;
      }
      return s;
    }
  }
  return std::nullopt;
}

double Potential::evaluate(const Point& x) const {
  switch (kind_) {
    case Kind::Bounded: return bounded_->f(x);
    case Kind::PowerSingularity: {
      double r2 = 0.0;
      for (int a = 0; a < dim_; ++a) {
        const double d = x[a] - power_->center[a];
        r2 += d * d;
      }
      if (r2 == 0.0) return power_->cap;
      return std::min(power_->cap, std::pow(r2, -0.5 * power_->gamma));
    }
    case Kind::RandomSample: {
      const auto& s = *random_;
      std::array<int, 3> j{0, 0, 0};
      Point off{0, 0, 0};
      for (int a = 0; a < dim_; ++a) {
        const double rel = x[a] - s.origin[a];
        const double fl = std::floor(rel);
        j[a] = static_cast<int>(fl);
        if (j[a] < 0 || j[a] >= s.cells[a]) return 0.0;
        off[a] = rel - fl;
      }
      const int flat = j[0] + s.cells[0] * (j[1] + s.cells[1] * j[2]);
      const double w = s.couplings[static_cast<std::size_t>(flat)];
      return w == 0.0 ? 0.0 : w * s.shape.eval(off, dim_);
    }
    case Kind::Sum: {
      double acc = 0.0;
      for (const auto& q : *parts_) acc += q.evaluate(x);
      return acc;
    }
  }
  return 0.0;
}

Eigen::VectorXd sample_on_grid(const Potential& v, const Grid& grid) {
  if (v.dim() != grid.domain.dim)
    throw std::invalid_argument("potential and grid disagree on dimension");
  const int total = grid.total();
  Eigen::VectorXd out(total);
  const bool averaged = v.is_singular();
  const int dim = grid.domain.dim;
  const auto sup = v.sup_bound();
  for (int flat = 0; flat < total; ++flat) {
    const Point c = grid.node(flat);
    double val;
    if (!averaged) {
      val = v.evaluate(c);
      if (sup && std::abs(val) > *sup * (1.0 + 1e-12) + 1e-12)
        throw std::runtime_error("potential exceeds its declared sup bound at a node");
    } else {
      // 5^dim midpoint average over the node cell
      int sub = 1;
      for (int a = 0; a < dim; ++a) sub *= 5;
      double acc = 0.0;
      for (int k = 0; k < sub; ++k) {
        Point p = c;
        int kk = k;
        for (int a = 0; a < dim; ++a) {
          const int q = kk % 5;
          kk /= 5;
          p[a] += ((q + 0.5) / 5.0 - 0.5) * grid.h[a];
        }
        acc += v.evaluate(p);
      }
      val = acc / sub;
    }
    out[flat] = val;
  }
  return out;
}

int count_form_bound_violations(const Eigen::VectorXd& samples, const Grid& grid,
                                const AdmissibilityConstants& c, int vectors,
                                std::uint64_t seed) {
  const int n = grid.total();
  if (samples.size() != n) throw std::invalid_argument("sample/grid size mismatch");
  const Eigen::VectorXd v2 = samples.array().square();
  int bad = 0;
  for (int k = 0; k < vectors; ++k) {
    rng::Stream st(seed, static_cast<std::uint64_t>(k));
    Eigen::VectorXd psi(n);
    for (int i = 0; i < n; ++i) psi[i] = st.normal(static_cast<std::uint64_t>(i));
    const double lhs = v2.cwiseProduct(psi).dot(psi);
    const double rhs = c.lambda1 * free_gradient_form(grid, psi) + c.lambda2 * psi.squaredNorm();
    if (lhs > rhs) ++bad;
  }
  return bad;
}

namespace {

// Smallest valid lambda1 for fixed lambda2 as a constrained extremal
// problem: on the complement of the constant vector, maximize
//   y^T (M + (Me)(Me)^T / (-e^T M e)) y   /   y^T K y,
// where M = diag(V^2) - lambda2 and e is the normalized constant vector.
// The rank-one term accounts for the optimal constant component, K is the
// natural-boundary stiffness. Solved exactly for small grids, by Lanczos on
// the congruence-transformed operator for large ones.
double constrained_lambda1(const Eigen::VectorXd& v2, double lambda2,
                           const Eigen::MatrixXd& K,
                           const Eigen::LLT<Eigen::MatrixXd>& bllt) {
  const int n = static_cast<int>(v2.size());
  const Eigen::VectorXd mdiag = v2.array() - lambda2;
  const double t = mdiag.mean();  // e^T M e
  const double rn = std::sqrt(static_cast<double>(n));
  const Eigen::VectorXd g = mdiag / rn;  // M e

  auto apply_a = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = x.array() - x.mean();
    Eigen::VectorXd z = mdiag.cwiseProduct(y) + g * (g.dot(y) / (-t));
    z.array() -= z.mean();
    return z;
  };

  if (n <= 700) {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      unit[j] = 1.0;
      a.col(j) = apply_a(unit);
      unit[j] = 0.0;
    }
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::MatrixXd b = K + Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(a, b);
    if (ges.info() != Eigen::Success)
      throw std::runtime_error("generalized eigensolve failed");
    return std::max(0.0, ges.eigenvalues().maxCoeff());
  }

  // Lanczos with full reorthogonalization on S = L^{-1} A L^{-T}
  const auto& lmat = bllt.matrixL();
  auto apply_s = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd u = lmat.transpose().solve(x);
    Eigen::VectorXd w = apply_a(u);
    return lmat.solve(w).eval();
  };
  const int iters = std::min(90, n - 1);
  Eigen::MatrixXd q(n, iters);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(iters);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(iters);
  rng::Stream st(0x6c616e63ull, static_cast<std::uint64_t>(n));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = st.normal(static_cast<std::uint64_t>(i));
  v.normalize();
  q.col(0) = v;
  int built = 0;
  for (int j = 0; j < iters; ++j) {
    built = j + 1;
    Eigen::VectorXd w = apply_s(q.col(j));
    alpha[j] = q.col(j).dot(w);
    w -= alpha[j] * q.col(j);
    if (j > 0) w -= beta[j - 1] * q.col(j - 1);
    // full reorthogonalization keeps the extreme value trustworthy
    w -= q.leftCols(built) * (q.leftCols(built).transpose() * w);
    const double nb = w.norm();
    if (j + 1 < iters) {
      if (nb < 1e-13) break;
      beta[j] = nb;
      q.col(j + 1) = w / nb;
    }
  }
  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(built, built);
  for (int j = 0; j < built; ++j) {
    tri(j, j) = alpha[j];
    if (j + 1 < built) tri(j, j + 1) = tri(j + 1, j) = beta[j];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(tri);
  const double lam = tes.eigenvalues().maxCoeff();
  // modest inflation; the probe loop downstream has the final word
  return std::max(0.0, lam) * 1.02 + 1e-15;
}

}  // namespace

AdmissibilityConstants estimate_constants(const Potential& v, const Grid& grid,
                                          std::span<const double> lambda2_grid,
                                          const EstimateOptions& opts) {
  if (lambda2_grid.empty())
    throw std::invalid_argument("lambda2 candidate grid is empty");
  for (double l2 : lambda2_grid)
    if (!(l2 >= 0.0)) throw std::invalid_argument("lambda2 candidates must be >= 0");

  const Eigen::VectorXd samples = sample_on_grid(v, grid);
  const Eigen::VectorXd v2 = samples.array().square();
  const int n = grid.total();
  const double mean2 = v2.mean();
  const double dev = (v2.array() - mean2).abs().maxCoeff();

  const Eigen::MatrixXd K = free_stiffness(grid);
  Eigen::LLT<Eigen::MatrixXd> bllt;
  if (n > 700) {
    Eigen::MatrixXd b = K + Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    bllt.compute(b);
    if (bllt.info() != Eigen::Success)
      throw std::runtime_error("stiffness factorization failed");
  }

  struct Cand {
    double l1, l2, score;
  };
  std::optional<Cand> best;
  for (double l2 : lambda2_grid) {
    double l1;
    if (dev == 0.0) {
      if (mean2 > l2) continue;  // constant potential needs lambda2 >= V^2
      l1 = 0.0;
    } else {
      if (mean2 - l2 >= 0.0) continue;  // constant test vector rules this lambda2 out
      l1 = constrained_lambda1(v2, l2, K, bllt);
    }
    const double score = l1 + opts.lambda2_weight * std::cbrt(l2);
    if (!best || score < best->score) best = Cand{l1, l2, score};
  }
  if (!best)
    throw std::runtime_error(
        "no feasible (lambda1, lambda2) pair on the candidate grid; "
        "extend the lambda2 candidates upward");

  double l1 = best->l1 * (1.0 + 1e-9);
  double l2 = best->l2;
  for (int iter = 0; iter < 60; ++iter) {
    AdmissibilityConstants c{l1, l2, AdmissibilityConstants::Provenance::Estimated,
                             grid.id()};
    if (count_form_bound_violations(samples, grid, c, opts.probe_vectors,
                                    opts.probe_seed) == 0)
      return c;
    if (l1 > 0.0)
      l1 *= 1.05;
    else if (iter >= 3)
      l1 = 1e-12;
    l2 = l2 * (1.0 + 1e-9) + 1e-12;
  }
  throw std::runtime_error("estimated constants kept failing the probe check");
}

ExtensionResult extend_by_reflection(const Eigen::VectorXd& samples, const Grid& grid) {
  if (samples.size() != grid.total())
    throw std::invalid_argument("sample/grid size mismatch");
  const int dim = grid.domain.dim;

  Grid eg;
  eg.domain = grid.domain;
  std::array<std::vector<int>, 3> srcmap;
  for (int a = 0; a < dim; ++a) {
    const int n = grid.n[a];
    const double h = grid.h[a];
    std::vector<int>& map = srcmap[a];
    switch (grid.domain.bc[a]) {
      case Bc::Dirichlet: {
        const int ne = 3 * n + 2;
        map.resize(ne);
        for (int k = 0; k < ne; ++k) {
          const int m = k - n;
          int i;
          if (m >= 1 && m <= n) {
            i = m - 1;
          } else if (m <= 0) {
            const int r = -m;  // nodes below lo, reflected upward
            i = r == 0 ? 0 : r - 1;
          } else {
            const int r = m - (n + 1);  // nodes above hi, reflected downward
            i = r == 0 ? n - 1 : n - r;
          }
          map[k] = i;
        }
        eg.domain.lo[a] = grid.domain.lo[a] - (n + 1) * h;
        eg.domain.hi[a] = grid.domain.hi[a] + (n + 1) * h;
        eg.n[a] = ne;
        break;
      }
      case Bc::Neumann: {
        const int ne = 3 * n;
        map.resize(ne);
        for (int k = 0; k < ne; ++k) {
          const int m = k - n;
          map[k] = m < 0 ? -m - 1 : (m < n ? m : 2 * n - 1 - m);
        }
        eg.domain.lo[a] = grid.domain.lo[a] - n * h;
        eg.domain.hi[a] = grid.domain.hi[a] + n * h;
        eg.n[a] = ne;
        break;
      }
      case Bc::Periodic: {
        const int ne = 3 * n;
        map.resize(ne);
        for (int k = 0; k < ne; ++k) map[k] = ((k - n) % n + n) % n;
        eg.domain.lo[a] = grid.domain.lo[a] - n * h;
        eg.domain.hi[a] = grid.domain.hi[a] + n * h;
        eg.n[a] = ne;
        break;
      }
    }
    eg.h[a] = h;  // spacing carried over bit for bit
  }

  Eigen::VectorXd out(eg.total());
  for (int flat = 0; flat < eg.total(); ++flat) {
    auto idx = eg.unflatten(flat);
    std::array<int, 3> src{0, 0, 0};
    for (int a = 0; a < dim; ++a) src[a] = srcmap[a][idx[a]];
    out[flat] = samples[grid.index(src)];
  }
  return {eg, std::move(out)};
}

std::vector<Potential> catalog_potentials(const Domain& domain) {
  const int d = domain.dim;
  std::array<double, 3> lo = domain.lo;
  std::array<double, 3> len{1.0, 1.0, 1.0};
  for (int a = 0; a < d; ++a) len[a] = domain.length(a);

  std::vector<Potential> cat;
  cat.push_back(Potential::zero(d));

  auto c5 = Potential::constant(d, 5.0);
  cat.push_back(c5);

  const double mid = lo[0] + 0.5 * len[0];
  cat.push_back(Potential::bounded(
      d, "step", [mid](const Point& x) { return x[0] < mid ? 3.0 : 0.0; }, 3.0));

  cat.push_back(Potential::bounded(
      d, "cosine",
      [lo, len, d](const Point& x) {
        double v = 2.5;
        for (int a = 0; a < d; ++a)
          v *= std::cos(2.0 * M_PI * (x[a] - lo[a]) / len[a]);
        return v;
      },
      2.5));

  Point center{0, 0, 0};
  for (int a = 0; a < d; ++a) center[a] = lo[a] + 0.37 * len[a];
  const double gamma = d == 1 ? 0.4 : 0.8;
  auto power = Potential::power_singularity(d, center, gamma, 1e6);
  cat.push_back(power);

  RandomSampleSpec spec;
  spec.origin = {lo[0], lo[1], lo[2]};
  long long ncells = 1;
  for (int a = 0; a < d; ++a) {
    spec.cells[a] = std::max(1, static_cast<int>(std::floor(len[a] + 1e-9)));
    ncells *= spec.cells[a];
  }
  rng::Stream st(42, 0x63617400ull);
  spec.couplings.resize(static_cast<std::size_t>(ncells));
  for (long long j = 0; j < ncells; ++j)
    spec.couplings[static_cast<std::size_t>(j)] =
        st.uniform01(static_cast<std::uint64_t>(j));
  cat.push_back(Potential::random_sample(d, spec));

  auto cosine = cat[3];
  cat.push_back(Potential::sum({cosine, power}));
  return cat;
}

}  // namespace uclab
