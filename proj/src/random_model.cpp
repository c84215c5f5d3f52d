#include "uclab/random_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "uclab/rng.hpp"

namespace uclab {
namespace {

void check_ensemble(const RandomEnsemble& e) {
  if (e.dim < 1 || e.dim > 3) throw std::invalid_argument("dimension must be 1..3");
  if (e.cells_per_axis < 1) throw std::invalid_argument("box side must be at least one cell");
  if (e.nodes_per_cell < 3)
    throw std::invalid_argument("at least 3 grid nodes per unit cell are required");
  if (e.base.dim() != e.dim)
    throw std::invalid_argument("background potential dimension does not match the ensemble");
}

std::array<int, 3> cell_array(const RandomEnsemble& e) {
  std::array<int, 3> cells{1, 1, 1};
  for (int a = 0; a < e.dim; ++a) cells[a] = e.cells_per_axis;
  return cells;
}

Eigen::VectorXd ensemble_samples(const RandomEnsemble& e, const Grid& grid,
                                 std::vector<double> couplings) {
  RandomSampleSpec spec;
  spec.cells = cell_array(e);
  spec.origin = Point{0.0, 0.0, 0.0};
  spec.shape = e.shape;
  spec.couplings = std::move(couplings);
  const Potential site_part = Potential::random_sample(e.dim, spec);
  return sample_on_grid(e.base, grid) + sample_on_grid(site_part, grid);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  LineFit fit;
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 2) return fit;
  const int n = fit.points;
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (n > 2) fit.slope_std_error = std::sqrt(ss_res / (n - 2) / sxx);
  return fit;
}

Eigen::VectorXd spectrum_of(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue solve failed");
  return es.eigenvalues();
}

int count_in_window(const Eigen::VectorXd& evals, double lo, double hi) {
  int c = 0;
  for (int i = 0; i < evals.size(); ++i)
    if (evals(i) >= lo && evals(i) <= hi) ++c;
  return c;
}

// 95% Wilson lower bound for hits successes out of m trials.
double wilson_lower(int hits, int m) {
  const double z = 1.959963984540054;
  const double p = static_cast<double>(hits) / m;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / m;
  const double center = p + z2 / (2.0 * m);
  const double half = z * std::sqrt(p * (1.0 - p) / m + z2 / (4.0 * m * m));
  return std::max(0.0, (center - half) / denom);
}

std::string outside_note(int dim) {
  if (dim >= 3) return "";
  return "outside stated hypothesis (stated for dimension 3, run at dimension " +
         std::to_string(dim) + ")";
}

}  // namespace

RandomEnsemble with_cells(RandomEnsemble ensemble, int cells_per_axis) {
  ensemble.cells_per_axis = cells_per_axis;
  return ensemble;
}

Grid ensemble_grid(const RandomEnsemble& ensemble) {
  check_ensemble(ensemble);
  Domain box;
  box.dim = ensemble.dim;
  for (int a = 0; a < ensemble.dim; ++a) {
    box.lo[a] = 0.0;
    box.hi[a] = ensemble.cells_per_axis;
    box.bc[a] = ensemble.bc;
  }
  std::vector<int> pts(ensemble.dim, ensemble.cells_per_axis * ensemble.nodes_per_cell);
  return build_grid(box, pts);
}

std::int64_t ensemble_cells(const RandomEnsemble& ensemble) {
  std::int64_t cells = 1;
  for (int a = 0; a < ensemble.dim; ++a) cells *= ensemble.cells_per_axis;
  return cells;
}

std::vector<double> sample_couplings(const RandomEnsemble& ensemble,
                                     std::uint64_t sample_index) {
  check_ensemble(ensemble);
  const std::int64_t cells = ensemble_cells(ensemble);
  rng::Stream stream(ensemble.master_seed, sample_index);
  std::vector<double> couplings(static_cast<std::size_t>(cells));
  for (std::int64_t j = 0; j < cells; ++j)
    couplings[static_cast<std::size_t>(j)] = stream.uniform01(static_cast<std::uint64_t>(j));
  return couplings;
}

DiscretizedHamiltonian operator_with_couplings(const RandomEnsemble& ensemble,
                                               std::span<const double> couplings) {
  check_ensemble(ensemble);
  const Grid grid = ensemble_grid(ensemble);
  std::vector<double> c(couplings.begin(), couplings.end());
  return assemble_hamiltonian(grid, ensemble_samples(ensemble, grid, std::move(c)));
}

DiscretizedHamiltonian draw_operator(const RandomEnsemble& ensemble,
                                     std::uint64_t sample_index) {
  return operator_with_couplings(ensemble, sample_couplings(ensemble, sample_index));
}

DiscretizedHamiltonian coupling_operator(const RandomEnsemble& ensemble, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw std::invalid_argument("the common coupling level must lie in [0,1]");
  check_ensemble(ensemble);
  std::vector<double> couplings(static_cast<std::size_t>(ensemble_cells(ensemble)), t);
  return operator_with_couplings(ensemble, couplings);
}

bool shape_covers_ball(const SiteShape& shape, int dim, double ball_radius,
                       int probes_per_axis) {
  if (!(ball_radius > 0.0 && ball_radius < 0.5)) return false;
  if (probes_per_axis < 2) throw std::invalid_argument("need at least 2 probes per axis");
  const double r2 = ball_radius * ball_radius;
  std::array<int, 3> idx{0, 0, 0};
  std::array<int, 3> count{1, 1, 1};
  for (int a = 0; a < dim; ++a) count[a] = probes_per_axis;
  for (idx[2] = 0; idx[2] < count[2]; ++idx[2])
    for (idx[1] = 0; idx[1] < count[1]; ++idx[1])
      for (idx[0] = 0; idx[0] < count[0]; ++idx[0]) {
        Point off{0.5, 0.5, 0.5};
        double d2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          off[a] = 0.5 + ball_radius * (2.0 * idx[a] / (count[a] - 1) - 1.0);
          const double d = off[a] - 0.5;
          d2 += d * d;
        }
        if (d2 > r2 * (1.0 + 1e-12)) continue;
        if (shape.eval(off, dim) < 1.0 - 1e-12) return false;
      }
  return true;
}

double EigenvalueCountResult::mean_at(int l_index, int eps_index) const {
  return means[static_cast<std::size_t>(l_index) * options.epsilons.size() + eps_index];
}

double EigenvalueCountResult::std_error_at(int l_index, int eps_index) const {
  return std_errors[static_cast<std::size_t>(l_index) * options.epsilons.size() + eps_index];
}

EigenvalueCountResult wegner_experiment(const RandomEnsemble& ensemble,
                                        const EigenvalueCountOptions& options,
                                        par::Exec exec) {
  check_ensemble(ensemble);
  if (options.epsilons.empty()) throw std::invalid_argument("no window half-widths given");
  for (std::size_t i = 0; i < options.epsilons.size(); ++i) {
    if (!(options.epsilons[i] > 0.0))
      throw std::invalid_argument("window half-widths must be positive");
    if (i > 0 && options.epsilons[i] <= options.epsilons[i - 1])
      throw std::invalid_argument("window half-widths must be strictly ascending");
  }
  if (options.box_sizes.empty()) throw std::invalid_argument("no box sizes given");
  if (options.samples < 50)
    throw std::invalid_argument("at least 50 samples per box size are required");
  const double max_eps = options.epsilons.back();
  if (!(options.energy + 3.0 * max_eps <= options.energy_cap))
    throw std::invalid_argument(
        "count window reaches past the energy cap: need E + 3*max(eps) <= E0");

  EigenvalueCountResult result;
  result.options = options;
  result.dim = ensemble.dim;
  result.hypothesis_note = outside_note(ensemble.dim);

  const int n_eps = static_cast<int>(options.epsilons.size());
  const int m = options.samples;
  result.means.assign(options.box_sizes.size() * n_eps, 0.0);
  result.std_errors.assign(options.box_sizes.size() * n_eps, 0.0);

  for (std::size_t li = 0; li < options.box_sizes.size(); ++li) {
    const RandomEnsemble box = with_cells(ensemble, options.box_sizes[li]);
    const Grid grid = ensemble_grid(box);
    const Eigen::MatrixXd lap = assemble_laplacian(grid);
    const Eigen::VectorXd background = sample_on_grid(box.base, grid);

    // counts[sample * n_eps + e], filled in parallel over samples.
    std::vector<double> counts(static_cast<std::size_t>(m) * n_eps, 0.0);
    par::run_indexed(exec, m, [&](std::int64_t s) {
      std::vector<double> couplings = sample_couplings(box, static_cast<std::uint64_t>(s));
      RandomSampleSpec spec;
      spec.cells = cell_array(box);
      spec.shape = box.shape;
      spec.couplings = std::move(couplings);
      const Potential site_part = Potential::random_sample(box.dim, spec);
      Eigen::MatrixXd h = lap;
      h.diagonal() += background + sample_on_grid(site_part, grid);
      const Eigen::VectorXd evals = spectrum_of(h);
      for (int e = 0; e < n_eps; ++e) {
        const double eps = options.epsilons[static_cast<std::size_t>(e)];
        counts[static_cast<std::size_t>(s) * n_eps + e] =
            count_in_window(evals, options.energy - eps, options.energy + eps);
      }
    });

    std::vector<double> column(static_cast<std::size_t>(m));
    for (int e = 0; e < n_eps; ++e) {
      for (int s = 0; s < m; ++s) column[static_cast<std::size_t>(s)] =
          counts[static_cast<std::size_t>(s) * n_eps + e];
      const double mean = par::pairwise_sum(column) / m;
      std::vector<double> dev_sq(static_cast<std::size_t>(m));
      for (int s = 0; s < m; ++s) {
        const double d = column[static_cast<std::size_t>(s)] - mean;
        dev_sq[static_cast<std::size_t>(s)] = d * d;
      }
      const double var = m > 1 ? par::pairwise_sum(dev_sq) / (m - 1) : 0.0;
      result.means[li * n_eps + e] = mean;
      result.std_errors[li * n_eps + e] = std::sqrt(var / m);
    }
  }

  // Fit log(mean / L^d) against log(eps) over every point with a positive mean.
  std::vector<double> xs, ys;
  for (std::size_t li = 0; li < options.box_sizes.size(); ++li) {
    const double volume = std::pow(options.box_sizes[li], ensemble.dim);
    for (int e = 0; e < n_eps; ++e) {
      const double mean = result.means[li * n_eps + e];
      if (mean > 0.0) {
        xs.push_back(std::log(options.epsilons[static_cast<std::size_t>(e)]));
        ys.push_back(std::log(mean / volume));
      }
    }
  }
  const LineFit fit = fit_line(xs, ys);
  result.tau = fit.slope;
  result.tau_std_error = fit.slope_std_error;
  result.log_c = fit.intercept;
  result.r_squared = fit.r_squared;
  result.fit_points = fit.points;

  std::ostringstream verdict;
  if (fit.points < 3) {
    verdict << "FAIL: only " << fit.points << " nonzero averages, need 3 to fit";
  } else if (fit.r_squared < 0.9) {
    verdict << "FAIL: fit explains " << fit.r_squared << " of variance, need 0.90";
  } else {
    const double lo = result.tau - 2.0 * result.tau_std_error;
    const double hi = result.tau + 2.0 * result.tau_std_error;
    if (hi <= 0.0 || lo > 1.0) {
      verdict << "FAIL: exponent " << result.tau << " +/- " << result.tau_std_error
              << " excludes (0,1]";
    } else {
      result.pass = true;
      verdict << "PASS";
    }
  }
  result.verdict = verdict.str();
  return result;
}

LiftingResult lifting_check(const RandomEnsemble& ensemble, const LiftingOptions& options) {
  check_ensemble(ensemble);
  if (options.epsilons.empty()) throw std::invalid_argument("no coupling increments given");
  for (std::size_t i = 0; i < options.epsilons.size(); ++i) {
    if (!(options.epsilons[i] > 0.0 && options.epsilons[i] <= 1.0))
      throw std::invalid_argument("coupling increments must lie in (0,1]");
    if (i > 0 && options.epsilons[i] <= options.epsilons[i - 1])
      throw std::invalid_argument("coupling increments must be strictly ascending");
  }
  if (options.max_levels < 1) throw std::invalid_argument("need at least one tracked level");

  const Grid grid = ensemble_grid(ensemble);
  const Eigen::MatrixXd lap = assemble_laplacian(grid);
  const Eigen::VectorXd background = sample_on_grid(ensemble.base, grid);
  const Eigen::VectorXd site_sum = [&] {
    std::vector<double> ones(static_cast<std::size_t>(ensemble_cells(ensemble)), 1.0);
    RandomSampleSpec spec;
    spec.cells = cell_array(ensemble);
    spec.shape = ensemble.shape;
    spec.couplings = std::move(ones);
    return sample_on_grid(Potential::random_sample(ensemble.dim, spec), grid);
  }();
  std::vector<double> couplings = sample_couplings(ensemble, options.sample_index);
  RandomSampleSpec spec;
  spec.cells = cell_array(ensemble);
  spec.shape = ensemble.shape;
  spec.couplings = couplings;
  const Eigen::VectorXd site_draw =
      sample_on_grid(Potential::random_sample(ensemble.dim, spec), grid);

  Eigen::MatrixXd base_matrix = lap;
  base_matrix.diagonal() += background + site_draw;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(base_matrix);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue solve failed");
  const Eigen::VectorXd base_evals = es.eigenvalues();

  int tracked = 0;
  while (tracked < base_evals.size() && tracked < options.max_levels &&
         base_evals(tracked) <= options.energy_cap)
    ++tracked;
  if (tracked == 0)
    throw std::invalid_argument("no eigenvalue lies at or below the tracking cap");

  LiftingResult result;
  for (int k = 1; k <= tracked; ++k) {
    result.levels.push_back(k);
    result.base_energies.push_back(base_evals(k - 1));
    // columns of the solver are Euclidean-orthonormal, so the grid volume
    // cancels between the form and the normalization
    const Eigen::MatrixXd span = es.eigenvectors().leftCols(k);
    const Eigen::MatrixXd overlap = span.transpose() * site_sum.asDiagonal() * span;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oes(overlap, Eigen::EigenvaluesOnly);
    result.rayleigh_sup.push_back(oes.eigenvalues().maxCoeff());
  }

  std::vector<Eigen::VectorXd> shifted;
  shifted.reserve(options.epsilons.size());
  for (double eps : options.epsilons) {
    Eigen::MatrixXd h = lap;
    h.diagonal() += background + site_draw + eps * site_sum;
    shifted.push_back(spectrum_of(h));
  }

  for (int k = 1; k <= tracked; ++k) {
    std::vector<double> log_eps, log_lift;
    double previous = 0.0;
    for (std::size_t e = 0; e < options.epsilons.size(); ++e) {
      LiftingRow row;
      row.level = k;
      row.epsilon = options.epsilons[e];
      row.base_energy = base_evals(k - 1);
      row.lift = shifted[e](k - 1) - base_evals(k - 1);
      result.rows.push_back(row);
      if (row.lift < previous - 1e-10 * (1.0 + std::abs(row.base_energy)))
        result.monotone = false;
      previous = row.lift;
      if (row.lift > 0.0) {
        log_eps.push_back(std::log(row.epsilon));
        log_lift.push_back(std::log(row.lift));
      }
    }
    const LineFit fit = fit_line(log_eps, log_lift);
    result.fitted_exponents.push_back(
        fit.points >= 2 ? fit.slope : std::numeric_limits<double>::quiet_NaN());
  }
  return result;
}

SpectralAvoidanceResult ils_experiment(const RandomEnsemble& ensemble,
                                       const SpectralAvoidanceOptions& options,
                                       par::Exec exec) {
  check_ensemble(ensemble);
  if (!(options.alpha > 0.0 && options.alpha < 1.0))
    throw std::invalid_argument("width exponent must lie in (0,1)");
  if (!(options.decay_q > 0.0)) throw std::invalid_argument("decay exponent must be positive");
  if (options.box_sizes.empty()) throw std::invalid_argument("no box sizes given");
  for (std::size_t i = 0; i < options.box_sizes.size(); ++i) {
    if (options.box_sizes[i] < 2)
      throw std::invalid_argument("box sizes must be at least 2 cells");
    if (i > 0 && options.box_sizes[i] <= options.box_sizes[i - 1])
      throw std::invalid_argument("box sizes must be strictly ascending");
  }
  if (options.samples < 1) throw std::invalid_argument("need at least one sample");

  SpectralAvoidanceResult result;
  result.options = options;
  result.dim = ensemble.dim;
  result.hypothesis_note = outside_note(ensemble.dim);
  result.l0 = options.box_sizes.front();

  const double max_width = std::pow(options.box_sizes.front(), -options.alpha);

  // Deterministic gap precheck: the interval must clear the spectrum of
  // H0 + tW at the endpoints and the midpoint, on every tested box.
  for (double t : {0.0, 0.5, 1.0}) {
    bool clear = true;
    for (int l : options.box_sizes) {
      const DiscretizedHamiltonian h = coupling_operator(with_cells(ensemble, l), t);
      const Eigen::VectorXd evals = spectrum_of(h.matrix());
      if (count_in_window(evals, options.interval_base,
                          options.interval_base + max_width) > 0) {
        clear = false;
        break;
      }
    }
    if (!clear) {
      result.precheck_ok = false;
      result.precheck_offending_t = t;
      if (options.precheck == GapPrecheck::Require) {
        std::ostringstream msg;
        msg << "the test interval meets the deterministic spectrum at coupling level t = "
            << t;
        throw std::invalid_argument(msg.str());
      }
      break;
    }
  }

  bool all_pass = true;
  for (int l : options.box_sizes) {
    const RandomEnsemble box = with_cells(ensemble, l);
    const Grid grid = ensemble_grid(box);
    const Eigen::MatrixXd lap = assemble_laplacian(grid);
    const Eigen::VectorXd background = sample_on_grid(box.base, grid);
    const double width = std::pow(l, -options.alpha);

    const int m = options.samples;
    std::vector<double> hits(static_cast<std::size_t>(m), 0.0);
    par::run_indexed(exec, m, [&](std::int64_t s) {
      RandomSampleSpec spec;
      spec.cells = cell_array(box);
      spec.shape = box.shape;
      spec.couplings = sample_couplings(box, static_cast<std::uint64_t>(s));
      const Potential site_part = Potential::random_sample(box.dim, spec);
      Eigen::MatrixXd h = lap;
      h.diagonal() += background + sample_on_grid(site_part, grid);
      const Eigen::VectorXd evals = spectrum_of(h);
      const int inside = count_in_window(evals, options.interval_base,
                                         options.interval_base + width);
      hits[static_cast<std::size_t>(s)] = inside == 0 ? 1.0 : 0.0;
    });

    const double hit_count = par::pairwise_sum(hits);
    const double p = hit_count / m;
    const double std_error = std::sqrt(std::max(0.0, p * (1.0 - p)) / m);
    const double threshold = 1.0 - std::pow(l, -options.decay_q);
    result.widths.push_back(width);
    result.p_hat.push_back(p);
    result.std_errors.push_back(std_error);
    result.wilson_low.push_back(wilson_lower(static_cast<int>(hit_count + 0.5), m));
    result.thresholds.push_back(threshold);
    if (p < threshold - 2.0 * std_error) all_pass = false;
  }

  result.pass = result.precheck_ok && all_pass;
  std::ostringstream verdict;
  if (result.pass) {
    verdict << "PASS";
  } else if (!result.precheck_ok) {
    verdict << "FAIL: interval is not in a deterministic spectral gap (t = "
            << result.precheck_offending_t << ")";
  } else {
    verdict << "FAIL: avoidance probability fell below 1 - L^{-q} - 2 stderr";
  }
  result.verdict = verdict.str();
  return result;
}

}  // namespace uclab
