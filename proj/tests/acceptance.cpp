// Acceptance gate: one pass/fail line per criterion, exit 0 only when every
// criterion holds. Tolerances are pinned here on purpose; loosening one is a
// reviewed decision, not a code path.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/carleman.hpp"
#include "uclab/config.hpp"
#include "uclab/control.hpp"
#include "uclab/domain.hpp"
#include "uclab/equidistributed.hpp"
#include "uclab/experiments.hpp"
#include "uclab/ghost.hpp"
#include "uclab/operators.hpp"
#include "uclab/potentials.hpp"
#include "uclab/random_model.hpp"
#include "uclab/rng.hpp"
#include "uclab/subspace.hpp"
#include "uclab/ucp.hpp"

namespace {

using namespace uclab;
namespace fs = std::filesystem;

constexpr double kSpectralRelTol = 1e-10;      // closed-form eigenvalue match
constexpr double kPdeResidualTol = 1e-8;       // spectral slab residual
constexpr double kFdOrderLow = 1.8;            // FD probe must look second order
constexpr double kFdOrderHigh = 2.2;
constexpr double kPhiSeriesTol = 1e-8;         // quadrature vs series at r = 1
constexpr double kChainSlack = 1e-9;           // float slack on the weight chains
constexpr double kBaselineFactor = 2.0;        // screened constant / baseline cap
constexpr double kCostMatchTol = 1e-8;         // closed-form vs synthesized cost
constexpr double kTerminalResidualTol = 1e-6;
constexpr double kTrendSlack = 0.95;           // cost trend, 5% noise allowance
constexpr double kZeroWindow = 1e-9;           // sampling window cushion at E = 0
constexpr double kCalibrationPad = 1.0 + 1e-9;

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

int g_failures = 0;

void run_criterion(int index, const char* name, const std::function<bool(std::string&)>& body) {
  Stopwatch watch;
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  if (!ok) ++g_failures;
  std::printf("criterion %d: %-48s %s", index, name, ok ? "PASS" : "FAIL");
  if (!detail.empty()) std::printf("  [%s]", detail.c_str());
  std::printf("  (%.1f s)\n", watch.seconds());
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

double closed_form_axis_eigenvalue(Bc bc, int n, int j, double h) {
  const double pi = std::acos(-1.0);
  double s = 0.0;
  switch (bc) {
    case Bc::Dirichlet:
      s = std::sin((j + 1) * pi / (2.0 * (n + 1)));
      break;
    case Bc::Neumann:
      s = std::sin(j * pi / (2.0 * n));
      break;
    case Bc::Periodic:
      s = std::sin(((j + 1) / 2) * pi / n);
      break;
  }
  return 4.0 * s * s / (h * h);
}

// ---------------------------------------------------------------------------
// 1. Discrete axis spectra against the closed forms.

bool axis_spectra(std::string& detail) {
  Stopwatch watch;
  double worst = 0.0;
  for (Bc bc : {Bc::Dirichlet, Bc::Neumann, Bc::Periodic}) {
    for (int n = 3; n <= 64; ++n) {
      const double h = bc == Bc::Dirichlet ? 1.0 / (n + 1) : 1.0 / n;
      const Eigendecomposition eig = eigendecompose(axis_laplacian(bc, n, h), h);
      for (int j = 0; j < n; ++j) {
        const double exact = closed_form_axis_eigenvalue(bc, n, j, h);
        const double err = std::abs(eig.eigenvalues(j) - exact) / std::max(1.0, exact);
        worst = std::max(worst, err);
      }
    }
  }
  const double elapsed = watch.seconds();
  std::ostringstream os;
  os << "worst rel err " << worst;
  detail = os.str();
  return worst <= kSpectralRelTol && elapsed < 5.0;
}

// ---------------------------------------------------------------------------
// 2. Estimated form-bound constants certify the whole potential catalog, and
//    the sub-box restriction map reproduces its exact values.

bool constants_certify(std::string& detail) {
  const Domain dom = Domain::interval(0.0, 1.0, Bc::Dirichlet);
  const Grid grid = build_grid(dom, std::array<int, 1>{64});
  std::vector<double> l2grid;
  for (int k = 0; k <= 14; ++k) l2grid.push_back(0.5 * std::pow(2.0, k));

  int violations = 0;
  int entries = 0;
  for (const Potential& v : catalog_potentials(dom)) {
    EstimateOptions opts;
    opts.probe_vectors = 100;
    opts.probe_seed = 0x61646d70ull + static_cast<std::uint64_t>(entries);
    const AdmissibilityConstants est = estimate_constants(v, grid, l2grid, opts);
    violations += count_form_bound_violations(sample_on_grid(v, grid), grid, est, 100,
                                              7100ull + static_cast<std::uint64_t>(entries));
    ++entries;
  }

  const AdmissibilityConstants r = restriction_constants(1.0, 0.0, 2.0, 2);
  const bool restriction_exact = r.lambda1 == 18.0 && r.lambda2 == 18.0;

  std::ostringstream os;
  os << entries << " potentials, " << violations << " probe violations";
  detail = os.str();
  return entries == 7 && violations == 0 && restriction_exact;
}

// ---------------------------------------------------------------------------
// 3. Calibrate the vanishing-order constant once on the free 1D operator at
//    zero energy, then demand observed >= predicted on held-out sweeps:
//    higher energies, bounded and singular potentials, and 2D boxes under
//    all three boundary conditions.

double min_observed(const DiscretizedHamiltonian& h, const Grid& grid,
                    const EquidistributedSet& set, double window, int trials,
                    std::uint64_t seed0) {
  double best = 1.0;
  for (int t = 0; t < trials; ++t) {
    const SubspaceFunction psi =
        sample_subspace(h, window, SampleMode::RandomMix, seed0 + static_cast<std::uint64_t>(t));
    best = std::min(best, observed_ratio(psi, set, grid));
  }
  return best;
}

bool vanishing_transfer(std::string& detail) {
  Stopwatch watch;
  const double G = 1.0;
  const std::array<double, 4> ratios{0.05, 0.1, 0.2, 0.4};
  const std::array<double, 3> energies{0.0, 5.0, 25.0};

  const Domain dom1 = Domain::interval(0.0, 2.0, Bc::Neumann);
  const Grid grid1 = build_grid(dom1, std::array<int, 1>{48});
  const DiscretizedHamiltonian free1 = assemble_hamiltonian(grid1, Eigen::VectorXd::Zero(48));

  std::vector<EquidistributedSet> sets1;
  for (double r : ratios) sets1.push_back(build_set(grid1, G, r * G, Placement::Center));

  // The continuation order is a constant of the dimension alone, so each
  // dimension calibrates it once on its own potential-free baseline at zero
  // energy and then holds it fixed across boundary conditions, potentials,
  // and energies. A one-dimensional order cannot dominate two-dimensional
  // geometry: the flat mode's sensor mass is the covered area fraction,
  // which shrinks quadratically in delta.
  auto calibrated_order = [&](const DiscretizedHamiltonian& h, const Grid& g,
                              const std::vector<EquidistributedSet>& sets,
                              std::uint64_t seed) {
    std::vector<CalibrationSample> calib;
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      const double obs = min_observed(h, g, sets[i], kZeroWindow, 3, seed + 10ull * i);
      calib.push_back({G, ratios[i] * G, 0.0, 0.0, 0.0, obs});
    }
    return calibrate_N(calib) * kCalibrationPad;
  };
  const double n_1d = calibrated_order(free1, grid1, sets1, 1000);

  int tested = 0;
  int violations = 0;
  auto transfer = [&](const DiscretizedHamiltonian& h, const Grid& g,
                      const std::vector<EquidistributedSet>& sets,
                      const AdmissibilityConstants& lam, double order, double energy,
                      std::uint64_t seed) {
    const double window = energy + kZeroWindow;
    if (h.min_eigenvalue() > window) return;  // empty subspace, nothing to observe
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      const double obs = min_observed(h, g, sets[i], window, 3, seed + 10ull * i);
      const UcpParams p{order, G, ratios[i] * G, lam.lambda1, lam.lambda2, energy};
      ++tested;
      if (obs < predicted_bound(p)) ++violations;
    }
  };

  // free operator across the energy sweep (zero energy replays the
  // calibration geometry with fresh seeds)
  for (std::size_t e = 0; e < energies.size(); ++e)
    transfer(free1, grid1, sets1, analytic_bounded_constants(0.0), n_1d, energies[e],
             20000ull + 1000ull * e);

  // bounded potentials from the catalog
  const std::vector<Potential> catalog = catalog_potentials(dom1);
  auto by_name = [&](const std::string& name) -> const Potential& {
    for (const Potential& v : catalog)
      if (v.name() == name) return v;
    throw std::runtime_error("catalog entry '" + name + "' is missing");
  };
  {
    const Potential& v = by_name("const");
    const DiscretizedHamiltonian h = assemble_hamiltonian(grid1, sample_on_grid(v, grid1));
    for (std::size_t e = 0; e < energies.size(); ++e)
      transfer(h, grid1, sets1, analytic_bounded_constants(5.0), n_1d, energies[e],
               30000ull + 1000ull * e);
  }
  {
    const Potential& v = by_name("cosine");
    const DiscretizedHamiltonian h = assemble_hamiltonian(grid1, sample_on_grid(v, grid1));
    for (std::size_t e = 0; e < energies.size(); ++e)
      transfer(h, grid1, sets1, analytic_bounded_constants(2.5), n_1d, energies[e],
               33000ull + 1000ull * e);
  }

  // singular potential with estimated constants
  {
    const Potential& v = by_name("power");
    std::vector<double> l2grid;
    for (int k = 0; k <= 14; ++k) l2grid.push_back(0.5 * std::pow(2.0, k));
    EstimateOptions opts;
    opts.probe_vectors = 100;
    opts.probe_seed = 424242;
    const AdmissibilityConstants lam = estimate_constants(v, grid1, l2grid, opts);
    const DiscretizedHamiltonian h = assemble_hamiltonian(grid1, sample_on_grid(v, grid1));
    for (std::size_t e = 0; e < energies.size(); ++e)
      transfer(h, grid1, sets1, lam, n_1d, energies[e], 40000ull + 1000ull * e);
  }

  // 2D boxes, one per boundary condition; the order comes from the 2D
  // potential-free baseline and the rest of the block is held out
  double n_2d = 0.0;
  {
    const std::array<Bc, 3> bcs{Bc::Dirichlet, Bc::Neumann, Bc::Periodic};
    std::vector<DiscretizedHamiltonian> ops;
    std::vector<Grid> grids;
    std::vector<std::vector<EquidistributedSet>> setlists;
    for (std::size_t b = 0; b < bcs.size(); ++b) {
      const std::array<double, 2> lo{0.0, 0.0};
      const std::array<double, 2> hi{1.0, 1.0};
      const std::array<Bc, 2> bc2{bcs[b], bcs[b]};
      const Domain dom2 = Domain::make(lo, hi, bc2);
      grids.push_back(build_grid(dom2, std::array<int, 2>{32, 32}));
      ops.push_back(assemble_hamiltonian(grids.back(), Eigen::VectorXd::Zero(32 * 32)));
      std::vector<EquidistributedSet> sets2;
      for (double r : ratios)
        sets2.push_back(build_set(grids.back(), G, r * G, Placement::Center));
      setlists.push_back(std::move(sets2));
    }
    n_2d = calibrated_order(ops[1], grids[1], setlists[1], 45000);
    for (std::size_t b = 0; b < bcs.size(); ++b)
      for (std::size_t e = 0; e < energies.size(); ++e)
        transfer(ops[b], grids[b], setlists[b], analytic_bounded_constants(0.0), n_2d,
                 energies[e], 50000ull + 10000ull * b + 1000ull * e);
  }

  const double elapsed = watch.seconds();
  std::ostringstream os;
  os << "orders " << n_1d << " / " << n_2d << ", " << tested << " held-out rows, "
     << violations << " violations";
  detail = os.str();
  return violations == 0 && tested >= 40 && elapsed < 600.0;
}

// ---------------------------------------------------------------------------
// 4. Slab extension: spectral residual at solver precision, FD residual of
//    second order, and the energy sandwich plus second-derivative bounds
//    across boundary conditions, potentials, energies, and slab widths.

bool slab_extension(std::string& detail) {
  // residual sharpness and FD order on one fixed configuration
  const Grid grid0 =
      build_grid(Domain::interval(0.0, 1.0, Bc::Dirichlet), std::array<int, 1>{40});
  const DiscretizedHamiltonian h0 =
      assemble_hamiltonian(grid0, Eigen::VectorXd::Constant(40, 5.0));
  const SubspaceFunction psi0 = sample_subspace(h0, 400.0, SampleMode::RandomMix, 71);
  const AdmissibilityConstants lam0 = analytic_bounded_constants(5.0);
  const GhostExtension coarse = build_extension(psi0, h0.eigensystem(), 0.5, 17, lam0);
  const GhostExtension fine = build_extension(psi0, h0.eigensystem(), 0.5, 33, lam0);
  const double spectral = std::max(pde_residual_spectral(coarse, h0).relative(),
                                   pde_residual_spectral(fine, h0).relative());
  const double fd_coarse = pde_residual_fd(coarse, h0).relative();
  const double fd_fine = pde_residual_fd(fine, h0).relative();
  const double order = std::log2(fd_coarse / fd_fine);
  const bool residual_ok = spectral <= kPdeResidualTol;
  const bool order_ok = order >= kFdOrderLow && order <= kFdOrderHigh;

  // sandwich and second-derivative sweep
  std::vector<double> l2grid;
  for (int k = 0; k <= 14; ++k) l2grid.push_back(0.5 * std::pow(2.0, k));
  const std::array<double, 3> energies{0.0, 5.0, 25.0};
  const std::array<double, 3> taus{0.1, 0.5, 1.0};
  int tested = 0;
  int rel_violations = 0;
  bool sweep_ok = true;
  std::uint64_t seed = 9000;
  for (Bc bc : {Bc::Dirichlet, Bc::Neumann, Bc::Periodic}) {
    const Domain dom = Domain::interval(0.0, 2.0, bc);
    const Grid grid = build_grid(dom, std::array<int, 1>{36});
    const std::vector<Potential> catalog = catalog_potentials(dom);
    const Potential* power = nullptr;
    for (const Potential& v : catalog)
      if (v.name() == "power") power = &v;
    if (power == nullptr) throw std::runtime_error("catalog entry 'power' is missing");
    const Potential zero = Potential::zero(1);
    const Potential constant5 = Potential::constant(1, 5.0);
    const std::array<const Potential*, 3> sweep_pots{&zero, &constant5, power};
    for (const Potential* v : sweep_pots) {
      AdmissibilityConstants lam;
      if (!v->is_singular() && v->sup_bound()) {
        lam = analytic_bounded_constants(*v->sup_bound());
      } else {
        EstimateOptions opts;
        opts.probe_vectors = 60;
        opts.probe_seed = 0x676f7374ull;
        lam = estimate_constants(*v, grid, l2grid, opts);
      }
      const DiscretizedHamiltonian h = assemble_hamiltonian(grid, sample_on_grid(*v, grid));
      const RelativeBoundConstants rel = probe_relative_constants(h);
      rel_violations += count_relative_bound_violations(h, rel.c, rel.c_tilde, 60, ++seed);
      for (double energy : energies) {
        const double window = energy + kZeroWindow;
        if (h.min_eigenvalue() > window) continue;
        const SubspaceFunction psi = sample_subspace(h, window, SampleMode::RandomMix, ++seed);
        for (double tau : taus) {
          const GhostExtension ext = build_extension(psi, h.eigensystem(), tau, 33, lam);
          const SandwichReport s = h1_norm_sandwich(ext, grid);
          const H2Report h2 = h2_decomposition(ext, h, rel.c, rel.c_tilde);
          sweep_ok = sweep_ok && s.lower_ok && s.upper_ok && h2.mixed_ok && h2.spatial_ok;
          ++tested;
        }
      }
    }
  }

  std::ostringstream os;
  os << "spectral " << spectral << ", fd order " << order << ", " << tested
     << " sandwich rows, " << rel_violations << " probe violations";
  detail = os.str();
  return residual_ok && order_ok && sweep_ok && rel_violations == 0 && tested >= 45;
}

// ---------------------------------------------------------------------------
// 5. Radial weight chains at random points, the quadrature value of the
//    profile against its alternating series, and pseudoconvexity of the
//    drift weight inside its stated radius range (with a violation outside).

bool weight_chains(std::string& detail) {
  // phi(1) from the alternating series of the exponential integral
  double sum = 0.0;
  double kfact = 1.0;
  for (int k = 1; k <= 25; ++k) {
    kfact *= k;
    const double term = 1.0 / (k * kfact);
    sum += (k % 2 == 1) ? term : -term;
  }
  const double phi_series = std::exp(-sum);
  const double series_gap = std::abs(phi_eval(1.0) - phi_series);

  // chain inequalities at random points of the annulus
  const double rho = 0.35;
  const double e = 2.718281828459045235;
  const AnnulusWeight w(rho);
  rng::Sequence seq(2026, 0x77636861ull);
  int chain_failures = 0;
  double worst_grad = 0.0;
  for (int i = 0; i < 10000; ++i) {
    std::array<double, 3> y{seq.next_normal(), seq.next_normal(), seq.next_normal()};
    double norm = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    if (norm == 0.0) norm = 1.0;
    const double r = rho * std::max(seq.next_uniform01(), 1e-6);
    for (double& c : y) c *= r / norm;
    const AnnulusWeight::Eval ev = w.eval(y);
    const double lo = r / (rho * e) - kChainSlack;
    const double hi = r / rho + kChainSlack;
    if (ev.w < lo || ev.w > hi) ++chain_failures;
    const double g2 =
        ev.grad[0] * ev.grad[0] + ev.grad[1] * ev.grad[1] + ev.grad[2] * ev.grad[2];
    worst_grad = std::max(worst_grad, g2);
    if (g2 > 1.0 / (rho * rho) + kChainSlack) ++chain_failures;
  }

  // drift weight pseudoconvexity inside and outside the stated range
  const PseudoconvexityReport inside1 = lr_pseudoconvexity_check(0.3, 10000, 3);
  const PseudoconvexityReport inside2 = lr_pseudoconvexity_check(0.5, 10000, 3);
  const PseudoconvexityReport outside = lr_pseudoconvexity_check(0.9, 10000, 3);
  const bool inside_ok = inside1.convexity_ok && inside1.time_derivative_ok &&
                         inside1.violations == 0 && inside1.min_margin > 0.0 &&
                         inside2.convexity_ok && inside2.time_derivative_ok &&
                         inside2.violations == 0 && inside2.min_margin > 0.0;
  const bool outside_violated = !outside.convexity_ok && outside.violations > 0;

  std::ostringstream os;
  os << "series gap " << series_gap << ", " << chain_failures << " chain failures";
  detail = os.str();
  return series_gap <= kPhiSeriesTol && chain_failures == 0 && inside_ok && outside_violated;
}

// ---------------------------------------------------------------------------
// 6. Calibrate both weighted-inequality baselines at V = 0, then screen every
//    catalog potential: the fitted constant stays within a factor of the
//    baseline and no quadrature row is flagged by the doubling check.

bool screened_inequalities(std::string& detail) {
  const std::array<double, 4> sweep{1.0, 2.0, 4.0, 8.0};
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);

  const Domain slice = Domain::interval(-0.3, 0.3, Bc::Dirichlet);
  const Grid sgrid = build_grid(slice, std::array<int, 1>{64});
  const std::vector<Potential> catalog = catalog_potentials(slice);
  std::vector<double> l2grid;
  for (int k = 0; k <= 14; ++k) l2grid.push_back(0.5 * std::pow(2.0, k));

  int flagged = 0;
  double worst_factor = 0.0;
  bool all_ok = true;
  for (CarlemanKind kind : {CarlemanKind::Nrt, CarlemanKind::Lr}) {
    CarlemanTrial base;
    base.kind = kind;
    const BaselineCalibration calib = calibrate_baseline(base, sweep, seeds);
    for (const CarlemanRow& row : calib.rows)
      if (row.refine_flagged) ++flagged;
    for (const Potential& v : catalog) {
      CarlemanTrial trial = base;
      trial.potential = v;
      AdmissibilityConstants lam;
      if (!v.is_singular() && v.sup_bound()) {
        lam = analytic_bounded_constants(*v.sup_bound());
      } else {
        EstimateOptions opts;
        opts.probe_vectors = 60;
        opts.probe_seed = 0x6361726cull;
        lam = estimate_constants(v, sgrid, l2grid, opts);
      }
      trial.lambda1 = lam.lambda1;
      trial.lambda2 = lam.lambda2;
      trial.baseline_threshold = calib.threshold_tilde;
      trial.baseline_constant = calib.constant_tilde;
      const double threshold = trial.threshold();
      const std::array<double, 3> exponents{threshold, 1.5 * threshold, 2.0 * threshold};
      const std::vector<CarlemanRow> rows = empirical_carleman(trial, exponents, seeds);
      for (const CarlemanRow& row : rows)
        if (row.refine_flagged) ++flagged;
      const double fitted = fitted_constant(trial, rows, threshold);
      const double factor = fitted / calib.constant_tilde;
      worst_factor = std::max(worst_factor, factor);
      all_ok = all_ok && factor <= kBaselineFactor;
    }
  }

  std::ostringstream os;
  os << "worst constant factor " << worst_factor << ", " << flagged << " flagged rows";
  detail = os.str();
  return all_ok && flagged == 0;
}

// ---------------------------------------------------------------------------
// 7. Control synthesis: closed form on a single retained mode, terminal
//    residual at a 12-mode configuration, the calibrated cost bound across a
//    radius/horizon sweep, and a monotone cost trend in the radius.

bool control_cost(std::string& detail) {
  // single retained mode against the closed form
  const Grid grid1 =
      build_grid(Domain::interval(0.0, 1.0, Bc::Dirichlet), std::array<int, 1>{20});
  const DiscretizedHamiltonian h1 = assemble_hamiltonian(grid1, Eigen::VectorXd::Zero(20));
  const Eigendecomposition& eig1 = h1.eigensystem();
  const double mu = eig1.eigenvalues(0);
  ControlProblem single;
  single.h = h1;
  single.set.node_weights = Eigen::VectorXd::Ones(h1.dimension());
  single.horizon = 0.25;
  single.u0 = eig1.eigenvectors.col(0);
  single.truncation_energy = 0.5 * (eig1.eigenvalues(0) + eig1.eigenvalues(1));
  const ControlResult rs = synthesize_control(single, 256);
  const double gram_closed = (1.0 - std::exp(-2.0 * mu * single.horizon)) / (2.0 * mu);
  const double cost_closed = std::exp(-mu * single.horizon) / std::sqrt(gram_closed);
  const double single_gap = std::abs(rs.cost - cost_closed) / cost_closed;
  const bool single_ok = rs.modes == 1 && single_gap <= kCostMatchTol;

  // 12-mode configuration: reach the target within the terminal tolerance
  const Grid grid2 =
      build_grid(Domain::interval(0.0, 2.0, Bc::Neumann), std::array<int, 1>{128});
  const DiscretizedHamiltonian h2 = assemble_hamiltonian(grid2, Eigen::VectorXd::Zero(128));
  const Eigendecomposition& eig2 = h2.eigensystem();
  const double trunc = 0.5 * (eig2.eigenvalues(11) + eig2.eigenvalues(12));
  const double G = 1.0;
  auto problem_at = [&](double ratio, double horizon) {
    ControlProblem p;
    p.h = h2;
    p.set = build_set(grid2, G, ratio * G, Placement::Center);
    p.horizon = horizon;
    p.u0 = sample_subspace(h2, trunc, SampleMode::RandomMix, 4242).values;
    p.truncation_energy = trunc;
    return p;
  };
  const ControlResult r12 = synthesize_control(problem_at(0.2, 1.0), 256);
  const bool twelve_ok = r12.modes == 12 && r12.terminal_residual <= kTerminalResidualTol;

  // calibrate the bound constant at the tightest swept radius (where the
  // control is most expensive), then check domination across the sweep
  const double kappa_minus = std::min(h2.min_eigenvalue(), 0.0);
  const std::array<double, 3> sweep_ratios{0.05, 0.1, 0.2};
  const std::array<double, 3> horizons{0.25, 1.0, 4.0};
  double costs[3][3];
  for (std::size_t i = 0; i < sweep_ratios.size(); ++i)
    for (std::size_t j = 0; j < horizons.size(); ++j)
      costs[i][j] = synthesize_control(problem_at(sweep_ratios[i], horizons[j]), 256).cost;
  std::vector<CostSample> samples;
  for (std::size_t j = 0; j < horizons.size(); ++j)
    samples.push_back({horizons[j], costs[0][j]});
  // calibration returns the infimum constant (equality at the binding
  // sample), so pad it the same way the continuation order is padded
  const double K = calibrate_cost_constant(G, sweep_ratios[0] * G, 0.0, 0.0, kappa_minus,
                                           samples) *
                   kCalibrationPad;
  int bound_violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < sweep_ratios.size(); ++i)
    for (std::size_t j = 0; j < horizons.size(); ++j) {
      const CostBoundParams params{K, G, sweep_ratios[i] * G, 0.0, 0.0,
                                   horizons[j], kappa_minus};
      worst_ratio = std::max(worst_ratio, costs[i][j] / cost_bound(params));
      if (costs[i][j] > cost_bound(params)) ++bound_violations;
    }

  // shrinking the sensor radius never makes the control cheaper
  const double cost40 = synthesize_control(problem_at(0.4, 1.0), 256).cost;
  const bool trend_ok = costs[0][1] >= kTrendSlack * costs[1][1] &&
                        costs[1][1] >= kTrendSlack * costs[2][1] &&
                        costs[2][1] >= kTrendSlack * cost40;

  std::ostringstream os;
  os << "closed-form gap " << single_gap << ", terminal " << r12.terminal_residual << ", K "
     << K << ", worst cost/bound " << worst_ratio << ", " << bound_violations
     << " bound violations";
  detail = os.str();
  return single_ok && twelve_ok && bound_violations == 0 && trend_ok;
}

// ---------------------------------------------------------------------------
// 8. Random ensemble statistics: eigenvalue-count scaling with a sublinear
//    exponent, uniform coupling lifts dominated by the shape floor, and
//    interval avoidance that passes in a deterministic gap while collapsing
//    on a bulk negative control.

bool random_statistics(std::string& detail) {
  Stopwatch wegner_watch;
  RandomEnsemble wens;
  wens.dim = 1;
  wens.bc = Bc::Dirichlet;
  wens.cells_per_axis = 12;
  wens.nodes_per_cell = 6;
  wens.master_seed = 11;
  EigenvalueCountOptions wopts;
  wopts.energy = 0.5;
  wopts.energy_cap = 2.0;
  wopts.epsilons = {0.05, 0.1, 0.2, 0.4};
  wopts.box_sizes = {6, 8, 10, 12};
  wopts.samples = 400;
  const EigenvalueCountResult wres = wegner_experiment(wens, wopts, par::Exec::OpenMP);
  const double wegner_elapsed = wegner_watch.seconds();
  const bool wegner_ok = wres.pass && wres.r_squared >= 0.9 && wres.tau > 0.0 &&
                         wres.tau <= 1.0 && wegner_elapsed < 300.0;

  RandomEnsemble lens;
  lens.dim = 1;
  lens.bc = Bc::Dirichlet;
  lens.cells_per_axis = 4;
  lens.nodes_per_cell = 6;
  lens.shape.kind = SiteShape::Kind::CellIndicator;
  lens.shape.amplitude = 0.6;
  lens.master_seed = 11;
  LiftingOptions lopts;
  lopts.sample_index = 2;
  lopts.epsilons = {0.25, 0.5, 1.0};
  lopts.energy_cap = 10.0;
  lopts.max_levels = 8;
  const LiftingResult lres = lifting_check(lens, lopts);
  bool lifting_ok = lres.monotone && !lres.rows.empty();
  for (const LiftingRow& row : lres.rows)
    lifting_ok = lifting_ok &&
                 row.lift >= lens.shape.amplitude * row.epsilon * (1.0 - 1e-9) - 1e-12;

  RandomEnsemble iens;
  iens.dim = 1;
  iens.bc = Bc::Dirichlet;
  iens.cells_per_axis = 32;
  iens.nodes_per_cell = 4;
  iens.master_seed = 11;
  SpectralAvoidanceOptions gap;
  gap.interval_base = -0.6;
  gap.alpha = 0.5;
  gap.decay_q = 1.0;
  gap.box_sizes = {8, 16, 32};
  gap.samples = 200;
  gap.precheck = GapPrecheck::Require;
  const SpectralAvoidanceResult gres = ils_experiment(iens, gap, par::Exec::OpenMP);
  const bool gap_ok = gres.pass && gres.verdict == "PASS" && gres.precheck_ok;

  SpectralAvoidanceOptions bulk = gap;
  bulk.interval_base = 0.5;
  bulk.alpha = 0.2;
  bulk.box_sizes = {8, 16};
  bulk.precheck = GapPrecheck::ReportOnly;
  const SpectralAvoidanceResult bres = ils_experiment(iens, bulk, par::Exec::OpenMP);
  double bulk_max = 0.0;
  for (double p : bres.p_hat) bulk_max = std::max(bulk_max, p);
  const bool bulk_ok = !bres.pass && !bres.precheck_ok && bulk_max <= 0.05;

  std::ostringstream os;
  os << "tau " << wres.tau << " (R^2 " << wres.r_squared << "), bulk max p " << bulk_max;
  detail = os.str();
  return wegner_ok && lifting_ok && gap_ok && bulk_ok;
}

// ---------------------------------------------------------------------------
// 9. Any experiment config rerun into a fresh directory yields byte-identical
//    CSV and JSON outputs.

bool rerun_determinism(std::string& detail) {
  const char* ucp_text =
      "kind = ucp\n"
      "label = rerun\n"
      "seed = 5\n"
      "[domain]\n"
      "hi = 2\n"
      "bc = neumann\n"
      "[grid]\n"
      "n = 20\n"
      "[ucp]\n"
      "delta_over_g = 0.1, 0.3\n"
      "energy = 1, 6\n"
      "trials = 2\n";
  const char* wegner_text =
      "kind = wegner\n"
      "label = rerun\n"
      "seed = 3\n"
      "[ensemble]\n"
      "cells = 6\n"
      "nodes_per_cell = 4\n"
      "[wegner]\n"
      "energy = 0.5\n"
      "energy_cap = 2\n"
      "epsilons = 0.1, 0.2\n"
      "boxes = 4, 6\n"
      "samples = 50\n";

  auto identical = [](const char* text, const std::string& tag) {
    const Config cfg = Config::parse(text);
    const fs::path base = fs::temp_directory_path() / "uclab_acceptance" / tag;
    fs::remove_all(base);
    RunOverrides first;
    first.out_dir = (base / "a").string();
    RunOverrides second;
    second.out_dir = (base / "b").string();
    const ResultRecord r1 = run_experiment(cfg, first);
    const ResultRecord r2 = run_experiment(cfg, second);
    const std::string csv1 = slurp(r1.csv_path);
    const std::string csv2 = slurp(r2.csv_path);
    const std::string json1 = slurp(r1.json_path);
    const std::string json2 = slurp(r2.json_path);
    return !csv1.empty() && csv1 == csv2 && !json1.empty() && json1 == json2;
  };

  const bool ucp_same = identical(ucp_text, "ucp");
  const bool wegner_same = identical(wegner_text, "wegner");
  detail = std::string("ucp ") + (ucp_same ? "stable" : "drifted") + ", wegner " +
           (wegner_same ? "stable" : "drifted");
  return ucp_same && wegner_same;
}

}  // namespace

int main() {
  run_criterion(1, "axis eigenvalues match closed forms", axis_spectra);
  run_criterion(2, "form-bound constants certify the catalog", constants_certify);
  run_criterion(3, "vanishing-order transfer to held-out sweeps", vanishing_transfer);
  run_criterion(4, "slab extension identities and energy sandwich", slab_extension);
  run_criterion(5, "radial weight chains and pseudoconvexity", weight_chains);
  run_criterion(6, "screened inequality constants near baseline", screened_inequalities);
  run_criterion(7, "control cost against the observability bound", control_cost);
  run_criterion(8, "random ensemble statistics", random_statistics);
  run_criterion(9, "rerun determinism", rerun_determinism);
  if (g_failures == 0) {
    std::printf("acceptance: all criteria pass\n");
    return 0;
  }
  std::printf("acceptance: %d criteria failing\n", g_failures);
  return 1;
}
