#include "uclab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include "uclab/csvio.hpp"
#include "uclab/rng.hpp"

namespace uclab {

namespace {

// (1 - e^{-t})/t, continuous at 0. expm1 keeps the difference exact for
// small t; the series head covers the final stretch where even that divides
// noise by noise.
double phi_integrand(double t) {
  if (t < 1e-8) return 1.0 - t / 2.0;
  return -std::expm1(-t) / t;
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = phi_integrand(lm);
  const double frm = phi_integrand(rm);
  const double left = simpson(a, m, fa, flm, fm);
  const double right = simpson(m, b, fm, frm, fb);
  const double both = left + right;
  if (depth <= 0 || std::fabs(both - whole) <= 15.0 * tol)
    return both + (both - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate_phi(double a, double b, double tol) {
  const double fa = phi_integrand(a);
  const double fb = phi_integrand(b);
  const double fm = phi_integrand(0.5 * (a + b));
  return adaptive_simpson(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 48);
}

}  // namespace

double phi_integral(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("phi_integral needs r >= 0");
  if (r == 0.0) return 0.0;
  return integrate_phi(0.0, r, 1e-12);
}

double phi_eval(double r) {
  if (!(r >= 0.0 && r <= 1.2))
    throw std::invalid_argument("phi is defined here on [0, 1.2] only");
  return r * std::exp(-phi_integral(r));
}

AnnulusWeight::AnnulusWeight(double rho) : rho_(rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("weight needs rho > 0");
  const int n = 4096;
  step_ = 1.2 / n;
  table_.resize(n + 1);
  table_[0] = 0.0;
  for (int k = 1; k <= n; ++k)
    table_[k] = table_[k - 1] + integrate_phi((k - 1) * step_, k * step_, 1e-14);
}

double AnnulusWeight::table_phi_integral(double r) const {
  if (!(r >= 0.0 && r <= 1.2 * (1.0 + 1e-12)))
    throw std::invalid_argument("phi argument outside [0, 1.2]");
  r = std::min(r, 1.2);
  const int n = static_cast<int>(table_.size()) - 1;
  int k = static_cast<int>(r / step_);
  k = std::clamp(k, 1, n - 2);
  const double x = r / step_ - k;
  // cubic Lagrange on the nodes k-1 .. k+2
  const double xm = x + 1.0, x1 = x - 1.0, x2 = x - 2.0;
  return table_[k - 1] * (-(x * x1 * x2) / 6.0) + table_[k] * ((xm * x1 * x2) / 2.0) +
         table_[k + 1] * (-(xm * x * x2) / 2.0) + table_[k + 2] * ((xm * x * x1) / 6.0);
}

double AnnulusWeight::phi(double r) const { return r * std::exp(-table_phi_integral(r)); }

double AnnulusWeight::phi_prime(double r) const {
  return std::exp(-table_phi_integral(r)) * std::exp(-r);
}

double AnnulusWeight::log_phi(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("log phi needs r > 0");
  return std::log(r) - table_phi_integral(r);
}

namespace {

// the two pointwise chains, checked at every evaluation:
//   |y|/(rho e) <= w <= |y|/rho  and  |grad w| <= w/|y| <= 1/rho
void check_chains(double r, double w, double dp) {
  if (!(w <= r * (1.0 + 1e-12) && w >= r / 2.718281828459045235 * (1.0 - 1e-12)))
    throw std::logic_error("weight left the |y|/(rho e) .. |y|/rho corridor");
  if (!(dp * r <= w * (1.0 + 1e-12)))
    throw std::logic_error("weight gradient chain failed");
}

}  // namespace

AnnulusWeight::Eval AnnulusWeight::eval(std::span<const double> y) const {
  double rsq = 0.0;
  for (double yi : y) rsq += yi * yi;
  const double dist = std::sqrt(rsq);
  if (!(dist > 0.0) || dist > rho_ * (1.0 + 1e-12))
    throw std::invalid_argument("weight evaluation needs 0 < |y| <= rho");
  const double r = dist / rho_;
  const double w = phi(r);
  const double dp = phi_prime(r);
  check_chains(r, w, dp);
  Eval out;
  out.w = w;
  const double radial = dp / rho_;
  for (std::size_t i = 0; i < y.size(); ++i) out.grad[i] = radial * y[i] / dist;
  return out;
}

double AnnulusWeight::checked_log(double dist) const {
  if (!(dist > 0.0) || dist > rho_ * (1.0 + 1e-12))
    throw std::invalid_argument("weight evaluation needs 0 < |y| <= rho");
  const double r = dist / rho_;
  const double lphi = table_phi_integral(r);
  const double w = r * std::exp(-lphi);
  check_chains(r, w, std::exp(-lphi) * std::exp(-r));
  return std::log(r) - lphi;
}

double drift_weight(std::span<const double> y) {
  const double t = y.back();
  double xsq = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) xsq += y[i] * y[i];
  return -t + t * t / 2.0 - xsq / 4.0;
}

double nrt_alpha0(double lambda1, double lambda2, double rho, double alpha0_tilde,
                  double c0_tilde) {
  if (lambda1 < 0.0 || lambda2 < 0.0 || !(rho > 0.0) || alpha0_tilde < 0.0 || c0_tilde < 0.0)
    throw std::invalid_argument("threshold formula needs nonnegative inputs and rho > 0");
  const double rho2 = rho * rho;
  return std::max(alpha0_tilde,
                  8.0 * c0_tilde * lambda1 * rho2 +
                      std::cbrt(4.0 * c0_tilde * lambda2 * rho2 * rho2));
}

double lr_beta0(double lambda1, double lambda2, double rho, double beta0_tilde,
                double c1_tilde) {
  constexpr double kRhoMax = 2.0 - 1.4142135623730950488;
  if (!(rho > 0.0 && rho < kRhoMax))
    throw std::invalid_argument(
        "drift-weight estimate needs rho in (0, 2 - sqrt 2); outside that range the "
        "weight is not pseudoconvex");
  if (lambda1 < 0.0 || lambda2 < 0.0 || beta0_tilde < 0.0 || c1_tilde < 0.0)
    throw std::invalid_argument("threshold formula needs nonnegative inputs");
  return std::max(beta0_tilde,
                  2.0 * c1_tilde * lambda1 * rho * rho + std::cbrt(4.0 * c1_tilde * lambda2));
}

namespace {

// Hessian of the drift weight is diag(-1/2, ..., -1/2, 1), so the form in
// condition (ii) is (xi_t^2 + u_t^2) - (|xi_x|^2 + |u_x|^2)/2.
double convexity_form(std::span<const double> xi, std::span<const double> grad) {
  const std::size_t dd = xi.size();
  double q = xi[dd - 1] * xi[dd - 1] + grad[dd - 1] * grad[dd - 1];
  for (std::size_t i = 0; i + 1 < dd; ++i)
    q -= 0.5 * (xi[i] * xi[i] + grad[i] * grad[i]);
  return q;
}

}  // namespace

PseudoconvexityReport lr_pseudoconvexity_check(double rho, int samples, int total_dim,
                                               std::uint64_t seed) {
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("pseudoconvexity sampling needs rho in (0, 1)");
  if (total_dim < 2 || total_dim > 3)
    throw std::invalid_argument("total dimension must be 2 or 3");
  if (samples < 1) throw std::invalid_argument("need at least one sample");

  const int dd = total_dim;
  PseudoconvexityReport rep;
  rep.min_dt_abs = std::numeric_limits<double>::infinity();
  rep.min_margin = std::numeric_limits<double>::infinity();

  for (int s = 0; s < samples; ++s) {
    rng::Sequence seq(seed, static_cast<std::uint64_t>(s));
    // uniform point in the upper half ball
    std::array<double, 3> p{0.0, 0.0, 0.0};
    double nrm = 0.0;
    for (int i = 0; i < dd; ++i) {
      p[i] = seq.next_normal();
      nrm += p[i] * p[i];
    }
    nrm = std::sqrt(nrm);
    if (nrm < 1e-14) continue;
    const double radius = rho * std::pow(seq.next_uniform01(), 1.0 / dd);
    for (int i = 0; i < dd; ++i) p[i] *= radius / nrm;
    p[dd - 1] = std::fabs(p[dd - 1]);

    std::array<double, 3> grad{0.0, 0.0, 0.0};
    double g2 = 0.0;
    for (int i = 0; i + 1 < dd; ++i) {
      grad[i] = -p[i] / 2.0;
      g2 += grad[i] * grad[i];
    }
    grad[dd - 1] = p[dd - 1] - 1.0;
    g2 += grad[dd - 1] * grad[dd - 1];
    const double gn = std::sqrt(g2);

    rep.min_dt_abs = std::min(rep.min_dt_abs, std::fabs(grad[dd - 1]));

    // candidate tangential covectors of length |grad u|: a few random
    // projections plus the one with the smallest time component, which is
    // where the form is extremal.
    std::array<std::array<double, 3>, 4> xis{};
    int n_xi = 0;
    for (int trial = 0; trial < 3; ++trial) {
      std::array<double, 3> eta{0.0, 0.0, 0.0};
      for (int i = 0; i < dd; ++i) eta[i] = seq.next_normal();
      double dot = 0.0;
      for (int i = 0; i < dd; ++i) dot += eta[i] * grad[i];
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      double xin = 0.0;
      for (int i = 0; i < dd; ++i) {
        xi[i] = eta[i] - dot / g2 * grad[i];
        xin += xi[i] * xi[i];
      }
      xin = std::sqrt(xin);
      if (xin < 1e-9) continue;
      for (int i = 0; i < dd; ++i) xi[i] *= gn / xin;
      xis[n_xi++] = xi;
    }
    {
      std::array<double, 3> xi{0.0, 0.0, 0.0};
      if (dd == 2) {
        xi[0] = -grad[1];
        xi[1] = grad[0];
      } else {
        // spatial rotation of x kills both the time component and the
        // inner product with grad u; on the time axis any spatial unit
        // direction is tangential
        const double xnorm = std::hypot(p[0], p[1]);
        if (xnorm > 1e-12) {
          xi[0] = -p[1] / xnorm * gn;
          xi[1] = p[0] / xnorm * gn;
        } else {
          xi[0] = gn;
        }
      }
      xis[n_xi++] = xi;
    }

    bool bad_here = false;
    for (int k = 0; k < n_xi; ++k) {
      double dot = 0.0;
      for (int i = 0; i < dd; ++i) dot += xis[k][i] * grad[i];
      if (std::fabs(dot) > 1e-10 * std::max(1.0, g2))
        throw std::logic_error("tangential projection drifted off the constraint");
      const double q = convexity_form(std::span<const double>(xis[k].data(), dd),
                                      std::span<const double>(grad.data(), dd));
      if (q < rep.min_margin) {
        rep.min_margin = q;
        rep.worst_point = p;
      }
      if (q <= 0.0) bad_here = true;
    }
    if (bad_here) ++rep.violations;
  }

  rep.time_derivative_ok = rep.min_dt_abs > 0.0;
  rep.convexity_ok = rep.violations == 0;
  return rep;
}

double CarlemanTrial::threshold() const {
  if (kind == CarlemanKind::Nrt)
    return nrt_alpha0(lambda1, lambda2, rho, baseline_threshold, baseline_constant);
  return lr_beta0(lambda1, lambda2, rho, baseline_threshold, baseline_constant);
}

namespace {

struct QuadAxis {
  std::vector<double> x;
  std::vector<double> w;
};

QuadAxis make_axis(double a, double b, int n) {
  QuadAxis ax;
  ax.x.resize(n);
  ax.w.resize(n);
  const double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) {
    ax.x[i] = a + i * h;
    ax.w[i] = (i == 0 || i + 1 == n) ? h / 2.0 : h;
  }
  return ax;
}

// Quadrature context for one resolution: axis nodes/weights and the
// potential cached over the spatial sub-grid.
struct ResContext {
  std::array<int, 3> n{1, 1, 1};
  std::array<QuadAxis, 3> axes;
  std::vector<double> vx;  // spatial potential values, axis 0 fastest
  int spatial_total = 1;
};

ResContext build_context(const CarlemanTrial& trial, int res) {
  const int dd = trial.total_dim;
  const int d = dd - 1;
  ResContext ctx;
  for (int a = 0; a < d; ++a) {
    ctx.n[a] = res;
    ctx.axes[a] = make_axis(-trial.rho, trial.rho, res);
  }
  if (trial.kind == CarlemanKind::Nrt) {
    ctx.n[d] = res;
    ctx.axes[d] = make_axis(-trial.rho, trial.rho, res);
  } else {
    ctx.n[d] = res / 2 + 1;
    ctx.axes[d] = make_axis(0.0, trial.rho, ctx.n[d]);
  }
  ctx.spatial_total = 1;
  for (int a = 0; a < d; ++a) ctx.spatial_total *= ctx.n[a];
  ctx.vx.assign(static_cast<std::size_t>(ctx.spatial_total), 0.0);
  if (trial.potential) {
    for (int flat = 0; flat < ctx.spatial_total; ++flat) {
      Point x{0.0, 0.0, 0.0};
      int rem = flat;
      for (int a = 0; a < d; ++a) {
        x[a] = ctx.axes[a].x[rem % ctx.n[a]];
        rem /= ctx.n[a];
      }
      ctx.vx[flat] = trial.potential->evaluate(x);
    }
  }
  return ctx;
}

struct Profile {
  double f = 0.0, fp = 0.0, fpp = 0.0;
};

// (1 - ((r-c)/rb)^2)^4 inside the shell, zero outside; C^3 across the edge.
Profile bump(double r, double c, double rb) {
  const double z = (r - c) / rb;
  if (std::fabs(z) >= 1.0) return {};
  const double q = 1.0 - z * z;
  const double q2 = q * q;
  Profile p;
  p.f = q2 * q2;
  p.fp = -8.0 * z * q2 * q / rb;
  p.fpp = (-8.0 * q2 * q + 48.0 * z * z * q2) / (rb * rb);
  return p;
}

struct FamilyParams {
  double c = 0.0;
  double rb = 0.0;
};

FamilyParams family_params(const CarlemanTrial& trial, std::uint64_t seed) {
  rng::Sequence seq(seed, 0x63617266ull);
  const double mid0 = 0.5 * (trial.sigma + 1.0) * trial.rho;
  const double hw0 = 0.5 * (1.0 - trial.sigma) * trial.rho;
  FamilyParams fp;
  fp.c = mid0 + 0.2 * hw0 * (2.0 * seq.next_uniform01() - 1.0);
  fp.rb = hw0 * (0.6 + 0.2 * seq.next_uniform01());
  return fp;
}

int effective_resolution(const CarlemanTrial& trial, double exponent) {
  int factor = static_cast<int>(std::ceil(std::max(1.0, exponent / 10.0)));
  factor = std::min(factor, trial.total_dim >= 3 ? 2 : 8);
  return trial.resolution * factor;
}

struct RowEval {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double outside_fraction = 0.0;  // test-function mass outside the support region
};

RowEval evaluate_once(const CarlemanTrial& trial, const AnnulusWeight* weight,
                      const ResContext& ctx, double ex, const FamilyParams& fam) {
  const int dd = trial.total_dim;
  const int d = dd - 1;
  const double rho = trial.rho;
  const bool nrt = trial.kind == CarlemanKind::Nrt;
  const double lref = nrt ? weight->log_phi(0.5 * (trial.sigma + 1.0)) : 0.0;

  const long total = static_cast<long>(ctx.n[0]) * ctx.n[1] * ctx.n[2];
  double x_grad = 0.0;   // scaled integral behind the gradient LHS term
  double x_mass = 0.0;   // scaled integral behind the zero-order LHS term
  double x_rhs = 0.0;    // scaled interior RHS integral
  double mass_in = 0.0;
  double mass_out = 0.0;

  std::array<double, 3> y{0.0, 0.0, 0.0};
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    int spatial_flat = 0;
    int spatial_stride = 1;
    double qw = 1.0;
    for (int a = 0; a < dd; ++a) {
      const int ia = static_cast<int>(rem % ctx.n[a]);
      rem /= ctx.n[a];
      y[a] = ctx.axes[a].x[ia];
      qw *= ctx.axes[a].w[ia];
      if (a < d) {
        spatial_flat += ia * spatial_stride;
        spatial_stride *= ctx.n[a];
      }
    }
    double rsq = 0.0;
    for (int a = 0; a < dd; ++a) rsq += y[a] * y[a];
    const double r = std::sqrt(rsq);

    const Profile pr = bump(r, fam.c, fam.rb);
    if (pr.f == 0.0 && pr.fp == 0.0) continue;

    const double vxv = ctx.vx.empty() ? 0.0 : ctx.vx[static_cast<std::size_t>(spatial_flat)];

    double psi_sq, grad_sq, rpsi;
    if (nrt) {
      psi_sq = pr.f * pr.f;
      grad_sq = pr.fp * pr.fp;
      rpsi = -(pr.fpp + (dd - 1) * pr.fp / r) + vxv * pr.f;
    } else {
      const double t = y[d];
      const double a = t * pr.fp / r;
      const double gt = a * t + pr.f;
      psi_sq = t * t * pr.f * pr.f;
      grad_sq = a * a * (rsq - t * t) + gt * gt;
      rpsi = t * (-pr.fpp - (dd + 1) * pr.fp / r + vxv * pr.f);
    }

    if (r > rho * (1.0 + 1e-9))
      mass_out += qw * psi_sq;
    else
      mass_in += qw * psi_sq;

    if (nrt) {
      const double lw = weight->checked_log(r) - lref;
      x_grad += qw * std::exp((1.0 - 2.0 * ex) * lw) * grad_sq;
      x_mass += qw * std::exp((-1.0 - 2.0 * ex) * lw) * psi_sq;
      x_rhs += qw * std::exp((2.0 - 2.0 * ex) * lw) * rpsi * rpsi;
    } else {
      const double ew = std::exp(2.0 * ex * drift_weight(std::span<const double>(y.data(), dd)));
      x_grad += qw * ew * grad_sq;
      x_mass += qw * ew * psi_sq;
      x_rhs += qw * ew * rpsi * rpsi;
    }
  }

  RowEval out;
  if (nrt) {
    const double el = std::exp(-lref);
    const double num = ex * rho * rho * x_grad * el + ex * ex * ex * x_mass * el * el * el;
    out.ratio = num / x_rhs;
    out.lhs = ex * rho * rho * x_grad * std::exp((1.0 - 2.0 * ex) * lref) +
              ex * ex * ex * x_mass * std::exp((-1.0 - 2.0 * ex) * lref);
    out.rhs = x_rhs * std::exp((2.0 - 2.0 * ex) * lref);
  } else {
    // initial-slice term of the right-hand side
    double x_bnd = 0.0;
    for (int flat = 0; flat < ctx.spatial_total; ++flat) {
      int rem = flat;
      double qw = 1.0;
      double rsq = 0.0;
      for (int a = 0; a < d; ++a) {
        const int ia = rem % ctx.n[a];
        rem /= ctx.n[a];
        const double xa = ctx.axes[a].x[ia];
        qw *= ctx.axes[a].w[ia];
        rsq += xa * xa;
      }
      const double rb = std::sqrt(rsq);
      const Profile pr = bump(rb, fam.c, fam.rb);
      if (pr.f == 0.0) continue;
      x_bnd += qw * std::exp(2.0 * ex * (-rsq / 4.0)) * pr.f * pr.f;
    }
    out.lhs = ex * x_grad + ex * ex * ex * x_mass;
    out.rhs = x_rhs + ex * x_bnd;
    out.ratio = out.lhs / out.rhs;
  }
  const double mass_total = mass_in + mass_out;
  out.outside_fraction = mass_total > 0.0 ? mass_out / mass_total : 0.0;
  return out;
}

}  // namespace

std::vector<CarlemanRow> empirical_carleman(const CarlemanTrial& trial,
                                            std::span<const double> sweep,
                                            std::span<const std::uint64_t> seeds,
                                            par::Exec exec) {
  if (sweep.empty() || seeds.empty())
    throw std::invalid_argument("empirical run needs a nonempty sweep and seed list");
  if (trial.total_dim < 2 || trial.total_dim > 3)
    throw std::invalid_argument("total dimension must be 2 or 3");
  if (!(trial.rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (!(trial.sigma > 0.0 && trial.sigma < 1.0))
    throw std::invalid_argument("inner support fraction must lie in (0, 1)");
  if (trial.potential && trial.potential->dim() != trial.total_dim - 1)
    throw std::invalid_argument("potential dimension must match the spatial slice");
  if (trial.kind == CarlemanKind::Lr && !(trial.rho < 2.0 - 1.4142135623730950488))
    throw std::invalid_argument("drift-weight trials need rho < 2 - sqrt 2");
  for (double ex : sweep)
    if (!(ex > 0.0)) throw std::invalid_argument("exponents must be positive");

  std::unique_ptr<AnnulusWeight> weight;
  if (trial.kind == CarlemanKind::Nrt) weight = std::make_unique<AnnulusWeight>(trial.rho);

  std::map<int, ResContext> contexts;
  for (double ex : sweep) {
    const int res = effective_resolution(trial, ex);
    contexts.try_emplace(res, ResContext{});
    contexts.try_emplace(2 * res, ResContext{});
  }
  for (auto& [res, ctx] : contexts) ctx = build_context(trial, res);

  struct Slot {
    double exponent;
    std::uint64_t seed;
    int res;
  };
  std::vector<Slot> slots;
  for (double ex : sweep)
    for (std::uint64_t sd : seeds) slots.push_back({ex, sd, effective_resolution(trial, ex)});

  std::vector<CarlemanRow> rows(slots.size());
  std::vector<double> outside(slots.size(), 0.0);
  par::run_indexed(exec, static_cast<std::int64_t>(slots.size()), [&](std::int64_t i) {
    const Slot& sl = slots[static_cast<std::size_t>(i)];
    const FamilyParams fam = family_params(trial, sl.seed);
    const RowEval base = evaluate_once(trial, weight.get(), contexts.at(sl.res), sl.exponent, fam);
    const RowEval fine =
        evaluate_once(trial, weight.get(), contexts.at(2 * sl.res), sl.exponent, fam);
    CarlemanRow row;
    row.exponent = sl.exponent;
    row.seed = sl.seed;
    row.lhs = base.lhs;
    row.rhs = base.rhs;
    row.ratio = base.ratio;
    row.resolution = sl.res;
    row.refined_ratio = fine.ratio;
    row.refine_flagged = std::fabs(fine.ratio - base.ratio) >= 0.05 * std::fabs(base.ratio);
    rows[static_cast<std::size_t>(i)] = row;
    outside[static_cast<std::size_t>(i)] = std::max(base.outside_fraction, fine.outside_fraction);
  });

  for (std::size_t i = 0; i < slots.size(); ++i)
    if (outside[i] > 1e-12)
      throw std::domain_error("test function for seed " + std::to_string(slots[i].seed) +
                              " puts mass outside the admissible support region");
  return rows;
}

BaselineCalibration calibrate_baseline(CarlemanTrial trial, std::span<const double> sweep,
                                       std::span<const std::uint64_t> seeds, par::Exec exec) {
  trial.potential.reset();
  trial.lambda1 = 0.0;
  trial.lambda2 = 0.0;
  BaselineCalibration cal;
  cal.rows = empirical_carleman(trial, sweep, seeds, exec);
  cal.threshold_tilde = *std::min_element(sweep.begin(), sweep.end());
  cal.constant_tilde = fitted_constant(trial, cal.rows, cal.threshold_tilde);
  return cal;
}

double fitted_constant(const CarlemanTrial& trial, std::span<const CarlemanRow> rows,
                       double threshold) {
  double best = -std::numeric_limits<double>::infinity();
  for (const CarlemanRow& row : rows) {
    if (row.exponent < threshold * (1.0 - 1e-12)) continue;
    const double value = trial.kind == CarlemanKind::Nrt
                             ? row.ratio / (trial.rho * trial.rho * trial.rho * trial.rho)
                             : row.ratio;
    best = std::max(best, value);
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("no rows at or above the screening threshold");
  return best;
}

std::string carleman_csv(const CarlemanTrial& trial, std::span<const CarlemanRow> rows) {
  io::Table t;
  t.set_header({"weight", "d", "rho", "exponent", "seed", "lhs", "rhs", "ratio",
                "refine_flag"});
  const char* kind = trial.kind == CarlemanKind::Nrt ? "annulus" : "drift";
  for (const CarlemanRow& r : rows)
    t.add_row({kind, io::format_int(trial.total_dim - 1), io::format_double(trial.rho),
               io::format_double(r.exponent), io::format_int(static_cast<long long>(r.seed)),
               io::format_double(r.lhs), io::format_double(r.rhs), io::format_double(r.ratio),
               r.refine_flagged ? "1" : "0"});
  return t.to_delimited(',');
}

}  // namespace uclab
