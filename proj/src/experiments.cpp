#include "uclab/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include "uclab/carleman.hpp"
#include "uclab/control.hpp"
#include "uclab/domain.hpp"
#include "uclab/equidistributed.hpp"
#include "uclab/ghost.hpp"
#include "uclab/operators.hpp"
#include "uclab/potentials.hpp"
#include "uclab/random_model.hpp"
#include "uclab/rng.hpp"
#include "uclab/subspace.hpp"
#include "uclab/ucp.hpp"
#include "uclab/version.hpp"

namespace uclab {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt(double x) { return io::format_double(x); }
std::string fmti(long long x) { return io::format_int(x); }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  return rng::splitmix64(rng::splitmix64(base + 0x9e3779b97f4a7c15ull * (a + 1)) ^
                         rng::splitmix64(b ^ 0x94d049bb133111ebull));
}

// Tag module errors with the sweep coordinates that triggered them.
template <class F>
auto at_point(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error("at " + where + ": " + e.what());
  }
}

void finish_or_throw(ConfigReader& reader) {
  std::vector<std::string> problems = reader.finish();
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

// ---------------------------------------------------------------------------
// Output plumbing. CSV rows hit the disk (and are flushed) as they are
// produced; the JSON mirror is assembled alongside and written at the end.

enum class RowVerdict { Pass, Fail, Neutral };

class Sink {
 public:
  void open(const fs::path& csv_path, std::vector<std::string> header, bool enabled) {
    header_ = header;
    table_.set_header(std::move(header));
    enabled_ = enabled;
    if (!enabled_) return;
    fs::create_directories(csv_path.parent_path());
    file_ = std::fopen(csv_path.string().c_str(), "wb");
    if (!file_) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
    write_line(header_);
  }

  void row(std::vector<std::string> cells, RowVerdict verdict) {
    if (cells.size() != header_.size())
      throw std::logic_error("row width does not match the header");
    if (verdict == RowVerdict::Fail) all_pass_ = false;
    if (enabled_) write_line(cells);
    table_.add_row(std::move(cells));
  }

  void close() {
    if (file_) {
      std::fclose(file_);
      file_ = nullptr;
    }
  }

  bool all_pass() const { return all_pass_; }
  const io::Table& table() const { return table_; }

  ~Sink() { close(); }

 private:
  void write_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line.push_back(',');
      line += cells[i];
    }
    line.push_back('\n');
    std::fputs(line.c_str(), file_);
    std::fflush(file_);
  }

  std::vector<std::string> header_;
  io::Table table_;
  FILE* file_ = nullptr;
  bool enabled_ = false;
  bool all_pass_ = true;
};

void write_json_mirror(const ResultRecord& rec, const ordered_json& meta, bool enabled) {
  if (!enabled) return;
  ordered_json j;
  j["kind"] = rec.kind;
  j["version"] = kToolVersion;
  j["digest"] = rec.digest;
  j["seed"] = rec.seed;
  j["all_pass"] = rec.all_pass;
  j["meta"] = meta;
  j["columns"] = rec.table.header();
  ordered_json rows = ordered_json::array();
  for (const auto& r : rec.table.rows()) rows.push_back(r);
  j["rows"] = std::move(rows);
  FILE* f = std::fopen(rec.json_path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open " + rec.json_path.string() + " for writing");
  const std::string text = j.dump(2) + "\n";
  std::fputs(text.c_str(), f);
  std::fclose(f);
}

std::string pass_text(bool ok) { return ok ? "PASS" : "FAIL"; }

// ---------------------------------------------------------------------------
// Shared config blocks.

template <class T>
bool broadcast(std::vector<T>& values, int dim, ConfigReader& r, const std::string& what) {
  if (values.size() == 1 && dim > 1) values.resize(static_cast<std::size_t>(dim), values[0]);
  if (values.size() != static_cast<std::size_t>(dim)) {
    r.complain(what + " needs 1 or " + std::to_string(dim) + " entries");
    return false;
  }
  return true;
}

Domain read_domain(ConfigReader& r) {
  Domain d;
  const long long dim = r.integer_or("domain", "dim", 1);
  if (dim < 1 || dim > 3) {
    r.complain("[domain] dim must be 1, 2, or 3");
    return d;
  }
  d.dim = static_cast<int>(dim);
  std::vector<double> lo = r.numbers_or("domain", "lo", {0.0});
  std::vector<double> hi = r.numbers_or("domain", "hi", {1.0});
  std::vector<std::string> bc = r.words_or("domain", "bc", {"dirichlet"});
  if (!broadcast(lo, d.dim, r, "[domain] lo") || !broadcast(hi, d.dim, r, "[domain] hi") ||
      !broadcast(bc, d.dim, r, "[domain] bc"))
    return d;
  for (int a = 0; a < d.dim; ++a) {
    d.lo[a] = lo[static_cast<std::size_t>(a)];
    d.hi[a] = hi[static_cast<std::size_t>(a)];
    if (!(d.lo[a] < d.hi[a]))
      r.complain("[domain] axis " + std::to_string(a) + " needs lo < hi");
    try {
      d.bc[a] = bc_from_name(bc[static_cast<std::size_t>(a)]);
    } catch (const std::exception& e) {
      r.complain(std::string("[domain] bc: ") + e.what());
    }
  }
  return d;
}

Grid read_grid(ConfigReader& r, const Domain& domain, long long fallback) {
  std::vector<long long> n = r.integers_or("grid", "n", {fallback});
  if (!broadcast(n, domain.dim, r, "[grid] n")) return Grid{};
  std::vector<int> pts;
  for (long long v : n) {
    if (v < 3 || v > 4096) {
      r.complain("[grid] n entries must lie in [3, 4096]");
      return Grid{};
    }
    pts.push_back(static_cast<int>(v));
  }
  if (!r.clean()) return Grid{};
  try {
    return build_grid(domain, pts);
  } catch (const std::exception& e) {
    r.complain(std::string("[grid] ") + e.what());
    return Grid{};
  }
}

Potential read_potential(ConfigReader& r, const Domain& domain) {
  const std::string kind = r.word_or("potential", "kind", "zero");
  const double value = r.number_or("potential", "value", 5.0);
  const double gamma =
      r.number_or("potential", "gamma", domain.dim == 1 ? 0.4 : 0.8);
  const double cap = r.number_or("potential", "cap", 1e6);
  std::vector<double> center = r.numbers_or("potential", "center", {});
  const std::string name = r.word_or("potential", "name", "");
  try {
    if (kind == "zero") return Potential::zero(domain.dim);
    if (kind == "constant") return Potential::constant(domain.dim, value);
    if (kind == "power") {
      Point c{0, 0, 0};
      if (center.empty()) {
        for (int a = 0; a < domain.dim; ++a) c[a] = domain.lo[a] + 0.37 * domain.length(a);
      } else if (broadcast(center, domain.dim, r, "[potential] center")) {
        for (int a = 0; a < domain.dim; ++a) c[a] = center[static_cast<std::size_t>(a)];
      }
      return Potential::power_singularity(domain.dim, c, gamma, cap);
    }
    const std::string wanted = kind == "catalog" ? name : kind;
    std::vector<std::string> known;
    for (const Potential& p : catalog_potentials(domain)) {
      if (p.name() == wanted) return p;
      known.push_back(p.name());
    }
    std::string list;
    for (const std::string& k : known) list += (list.empty() ? "" : ", ") + k;
    r.complain("[potential] kind '" + kind + "' unknown; use zero, constant, power, "
               "catalog (with name), or one of: " + list);
  } catch (const std::exception& e) {
    r.complain(std::string("[potential] ") + e.what());
  }
  return Potential::zero(domain.dim >= 1 && domain.dim <= 3 ? domain.dim : 1);
}

std::vector<double> default_lambda2_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 14; ++k) g.push_back(0.5 * std::pow(2.0, k));
  return g;
}

struct ConstantsPlan {
  bool force_estimate = false;
  std::vector<double> lambda2_grid;
  int probes = 100;
};

ConstantsPlan read_constants_plan(ConfigReader& r) {
  ConstantsPlan plan;
  plan.force_estimate = r.flag_or("constants", "estimate", false);
  plan.lambda2_grid = r.numbers_or("constants", "lambda2_grid", default_lambda2_grid());
  plan.probes = static_cast<int>(r.integer_or("constants", "probes", 100));
  if (plan.lambda2_grid.empty()) r.complain("[constants] lambda2_grid must be non-empty");
  for (double v : plan.lambda2_grid)
    if (!(v > 0.0)) {
      r.complain("[constants] lambda2_grid entries must be positive");
      break;
    }
  if (plan.probes < 1) r.complain("[constants] probes must be >= 1");
  return plan;
}

AdmissibilityConstants resolve_constants(const ConstantsPlan& plan, const Potential& v,
                                         const Grid& grid, std::uint64_t seed) {
  if (!plan.force_estimate && !v.is_singular() && v.sup_bound())
    return analytic_bounded_constants(*v.sup_bound());
  EstimateOptions opts;
  opts.probe_vectors = plan.probes;
  opts.probe_seed = derive_seed(seed, 0xadc0);
  return estimate_constants(v, grid, plan.lambda2_grid, opts);
}

// ---------------------------------------------------------------------------
// Individual experiment runners. Each reads and validates its keys, calls
// finish_or_throw, then (unless dry) computes rows in sweep order.

struct RunContext {
  std::uint64_t seed = 1;
  par::Exec exec = par::Exec::Serial;
  bool dry = false;
};

void run_constants(ConfigReader& r, const RunContext& ctx, ResultRecord& rec,
                   ordered_json& meta, Sink& sink) {
  const Domain domain = read_domain(r);
  const Grid grid = read_grid(r, domain, 32);
  const ConstantsPlan plan = read_constants_plan(r);
  finish_or_throw(r);
  if (ctx.dry) return;

  sink.open(rec.csv_path,
            {"potential[name]", "lambda1[1]", "lambda2[energy]", "provenance[text]",
             "probe_violations[count]", "verdict[text]"},
            true);
  const std::vector<Potential> catalog = catalog_potentials(domain);
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const Potential& v = catalog[i];
    at_point("potential " + v.name(), [&] {
      EstimateOptions opts;
      opts.probe_vectors = plan.probes;
      opts.probe_seed = derive_seed(ctx.seed, i);
      const AdmissibilityConstants est =
          estimate_constants(v, grid, plan.lambda2_grid, opts);
      const int violations = count_form_bound_violations(
          sample_on_grid(v, grid), grid, est, plan.probes, derive_seed(ctx.seed, i, 1));
      sink.row({v.name(), fmt(est.lambda1), fmt(est.lambda2),
                est.provenance == AdmissibilityConstants::Provenance::Analytic ? "analytic"
                                                                               : "estimated",
                fmti(violations), pass_text(violations == 0)},
               violations == 0 ? RowVerdict::Pass : RowVerdict::Fail);
    });
  }
  meta["probes"] = fmti(plan.probes);
}

void run_ucp(ConfigReader& r, const RunContext& ctx, ResultRecord& rec, ordered_json& meta,
             Sink& sink) {
  const Domain domain = read_domain(r);
  const Grid grid = read_grid(r, domain, 32);
  const Potential v = read_potential(r, domain);
  const ConstantsPlan cplan = read_constants_plan(r);

  const double g = r.number_or("ucp", "G", 1.0);
  if (!(g > 0.0)) r.complain("[ucp] G must be positive");
  std::vector<double> ratios = r.numbers_or("ucp", "delta_over_g", {});
  if (ratios.empty()) r.complain("[ucp] delta_over_g sweep list is required and non-empty");
  for (double x : ratios)
    if (!(x > 0.0 && x < 0.5))
      r.complain("[ucp] delta_over_g = " + fmt(x) +
                 " rejected: the continuation bound needs 0 < delta < G/2");
  std::vector<double> energies = r.numbers_or("ucp", "energy", {0.0});
  if (energies.empty()) r.complain("[ucp] energy sweep list must be non-empty");
  const long long trials = r.integer_or("ucp", "trials", 3);
  if (trials < 1) r.complain("[ucp] trials must be >= 1");
  const std::optional<double> fixed_n = r.number("ucp", "scale_constant");
  if (fixed_n && !(*fixed_n > 0.0)) r.complain("[ucp] scale_constant must be positive");
  const std::string placement_word = r.word_or("ucp", "placement", "center");
  Placement placement = Placement::Center;
  if (placement_word == "random")
    placement = Placement::SeededRandom;
  else if (placement_word != "center")
    r.complain("[ucp] placement must be 'center' or 'random'");
  finish_or_throw(r);
  if (ctx.dry) return;

  const DiscretizedHamiltonian h = assemble_hamiltonian(grid, sample_on_grid(v, grid));
  const AdmissibilityConstants lam = resolve_constants(cplan, v, grid, ctx.seed);

  struct PointResult {
    double delta = 0.0;
    double energy = 0.0;
    double observed = 1.0;
  };
  std::vector<PointResult> points;
  for (std::size_t di = 0; di < ratios.size(); ++di) {
    const double delta = ratios[di] * g;
    for (std::size_t ei = 0; ei < energies.size(); ++ei) {
      const double energy = energies[ei];
      const std::string where =
          "delta_over_g=" + fmt(ratios[di]) + ", energy=" + fmt(energy);
      at_point(where, [&] {
        const std::uint64_t pi = di * energies.size() + ei;
        const EquidistributedSet set =
            build_set(grid, g, delta, placement, derive_seed(ctx.seed, pi, 0x5e7));
        double observed = 1.0;
        for (long long t = 0; t < trials; ++t) {
          const SubspaceFunction psi = sample_subspace(
              h, energy, SampleMode::RandomMix, derive_seed(ctx.seed, pi, 1 + t));
          observed = std::min(observed, observed_ratio(psi, set, grid));
        }
        points.push_back({delta, energy, observed});
      });
    }
  }

  double n_used = 0.0;
  bool calibrated = false;
  if (fixed_n) {
    n_used = *fixed_n;
  } else {
    std::vector<CalibrationSample> samples;
    for (const PointResult& p : points)
      samples.push_back({g, p.delta, lam.lambda1, lam.lambda2, p.energy, p.observed});
    n_used = calibrate_N(samples) * (1.0 + 1e-9);
    calibrated = true;
  }

  sink.open(rec.csv_path,
            {"potential[name]", "bc[text]", "G[length]", "delta[length]", "energy[energy]",
             "lambda1[1]", "lambda2[energy]", "scale_constant[1]", "observed[1]",
             "predicted[1]", "verdict[text]"},
            true);
  for (const PointResult& p : points) {
    UcpParams params{n_used, g, p.delta, lam.lambda1, lam.lambda2, p.energy};
    const double predicted = predicted_bound(params);
    const bool ok = p.observed >= predicted;
    sink.row({v.name(), domain.bc_tag(), fmt(g), fmt(p.delta), fmt(p.energy),
              fmt(lam.lambda1), fmt(lam.lambda2), fmt(n_used), fmt(p.observed),
              fmt(predicted), pass_text(ok)},
             ok ? RowVerdict::Pass : RowVerdict::Fail);
  }
  meta["scale_constant"] = fmt(n_used);
  meta["calibrated"] = calibrated;
  meta["trials"] = fmti(trials);
}

void run_ghost(ConfigReader& r, const RunContext& ctx, ResultRecord& rec, ordered_json& meta,
               Sink& sink) {
  const Domain domain = read_domain(r);
  const Grid grid = read_grid(r, domain, 24);
  const Potential v = read_potential(r, domain);
  const ConstantsPlan cplan = read_constants_plan(r);

  std::vector<double> taus = r.numbers_or("ghost", "tau", {});
  if (taus.empty()) r.complain("[ghost] tau sweep list is required and non-empty");
  for (double t : taus)
    if (!(t > 0.0)) r.complain("[ghost] tau entries must be positive");
  std::vector<double> energies = r.numbers_or("ghost", "energy", {5.0});
  if (energies.empty()) r.complain("[ghost] energy sweep list must be non-empty");
  for (double e : energies)
    if (e < 0.0) r.complain("[ghost] energies must be >= 0 for the slab estimate");
  const long long n_t = r.integer_or("ghost", "time_nodes", 33);
  if (n_t < 9 || n_t % 2 == 0) r.complain("[ghost] time_nodes must be odd and >= 9");
  const double spectral_tol = r.number_or("tolerances", "spectral_residual", 1e-8);
  const double order_low = r.number_or("tolerances", "fd_order_low", 1.8);
  const double order_high = r.number_or("tolerances", "fd_order_high", 2.2);
  if (!(spectral_tol > 0.0)) r.complain("[tolerances] spectral_residual must be positive");
  if (!(order_low > 0.0 && order_high > order_low))
    r.complain("[tolerances] fd order band must satisfy 0 < low < high");
  finish_or_throw(r);
  if (ctx.dry) return;

  const DiscretizedHamiltonian h = assemble_hamiltonian(grid, sample_on_grid(v, grid));
  const AdmissibilityConstants lam = resolve_constants(cplan, v, grid, ctx.seed);
  const RelativeBoundConstants rel = probe_relative_constants(h);

  sink.open(rec.csv_path,
            {"bc[text]", "potential[name]", "energy[energy]", "tau[time]",
             "time_nodes[count]", "spectral_residual[1]", "fd_order[1]", "lower_ok[bool]",
             "upper_ok[bool]", "mixed_ok[bool]", "spatial_ok[bool]", "verdict[text]"},
            true);
  for (std::size_t ei = 0; ei < energies.size(); ++ei) {
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
      const double energy = energies[ei];
      const double tau = taus[ti];
      at_point("energy=" + fmt(energy) + ", tau=" + fmt(tau), [&] {
        const std::uint64_t pi = ei * taus.size() + ti;
        const SubspaceFunction psi = sample_subspace(h, energy, SampleMode::RandomMix,
                                                     derive_seed(ctx.seed, pi, 0x6057));
        const GhostExtension ext = build_extension(psi, h.eigensystem(), tau,
                                                   static_cast<int>(n_t), lam, ctx.exec);
        const GhostExtension fine = build_extension(psi, h.eigensystem(), tau,
                                                    static_cast<int>(2 * n_t - 1), lam,
                                                    ctx.exec);
        const double spectral = pde_residual_spectral(ext, h).relative();
        const double coarse_fd = pde_residual_fd(ext, h).relative();
        const double fine_fd = pde_residual_fd(fine, h).relative();
        const double order = std::log2(coarse_fd / fine_fd);
        const SandwichReport sw = h1_norm_sandwich(ext, grid);
        const H2Report h2 = h2_decomposition(ext, h, rel.c, rel.c_tilde);
        const bool ok = spectral <= spectral_tol && order >= order_low &&
                        order <= order_high && sw.lower_ok && sw.upper_ok && h2.mixed_ok &&
                        h2.spatial_ok;
        sink.row({domain.bc_tag(), v.name(), fmt(energy), fmt(tau), fmti(n_t),
                  fmt(spectral), fmt(order), pass_text(sw.lower_ok), pass_text(sw.upper_ok),
                  pass_text(h2.mixed_ok), pass_text(h2.spatial_ok), pass_text(ok)},
                 ok ? RowVerdict::Pass : RowVerdict::Fail);
      });
    }
  }
  meta["relative_c"] = fmt(rel.c);
  meta["relative_c_tilde"] = fmt(rel.c_tilde);
  meta["lambda1"] = fmt(lam.lambda1);
  meta["lambda2"] = fmt(lam.lambda2);
}

void run_carleman(ConfigReader& r, const RunContext& ctx, ResultRecord& rec,
                  ordered_json& meta, Sink& sink, CarlemanKind kind) {
  const double rho = r.number_or("carleman", "rho", 0.3);
  const double sigma = r.number_or("carleman", "sigma", 0.1);
  const long long total_dim = r.integer_or("carleman", "dim", 2);
  const long long resolution = r.integer_or("carleman", "resolution", 64);
  const long long seed_count = r.integer_or("carleman", "seeds", 10);
  const double screen_factor = r.number_or("carleman", "screen_factor", 2.0);
  std::vector<double> exponents = r.numbers_or("carleman", "exponents", {});
  if (exponents.empty())
    r.complain("[carleman] exponents sweep list is required and non-empty");
  for (double a : exponents)
    if (!(a > 0.0)) r.complain("[carleman] exponents must be positive");
  if (!(rho > 0.0)) r.complain("[carleman] rho must be positive");
  if (kind == CarlemanKind::Lr && !(rho < 2.0 - std::sqrt(2.0)))
    r.complain("[carleman] the drift weight needs rho in (0, 2 - sqrt 2)");
  if (!(sigma > 0.0 && sigma < 1.0)) r.complain("[carleman] sigma must lie in (0,1)");
  if (total_dim < 2 || total_dim > 3) r.complain("[carleman] dim must be 2 or 3");
  if (resolution < 8 || resolution > 2048)
    r.complain("[carleman] resolution must lie in [8, 2048]");
  if (seed_count < 1) r.complain("[carleman] seeds must be >= 1");
  if (!(screen_factor >= 1.0)) r.complain("[carleman] screen_factor must be >= 1");

  Domain slice;
  slice.dim = std::max(1, static_cast<int>(total_dim) - 1);
  for (int a = 0; a < slice.dim; ++a) {
    slice.lo[a] = -rho;
    slice.hi[a] = rho;
    slice.bc[a] = Bc::Neumann;
  }
  const Potential v = read_potential(r, slice);
  const ConstantsPlan cplan = read_constants_plan(r);
  const Grid lambda_grid = read_grid(r, slice, 48);
  finish_or_throw(r);
  if (ctx.dry) return;

  const bool trivial = v.kind() == Potential::Kind::Bounded && v.name() == "zero";
  AdmissibilityConstants lam;
  if (!trivial)
    lam = at_point("admissibility estimate",
                   [&] { return resolve_constants(cplan, v, lambda_grid, ctx.seed); });

  CarlemanTrial trial;
  trial.kind = kind;
  trial.total_dim = static_cast<int>(total_dim);
  trial.rho = rho;
  trial.sigma = sigma;
  trial.resolution = static_cast<int>(resolution);
  std::vector<std::uint64_t> seeds;
  for (long long i = 0; i < seed_count; ++i) seeds.push_back(derive_seed(ctx.seed, i));

  const BaselineCalibration baseline =
      at_point("baseline calibration", [&] {
        return calibrate_baseline(trial, exponents, seeds, ctx.exec);
      });
  trial.baseline_threshold = baseline.threshold_tilde;
  trial.baseline_constant = baseline.constant_tilde;
  if (!trivial) {
    trial.potential = v;
    trial.lambda1 = lam.lambda1;
    trial.lambda2 = lam.lambda2;
  }
  const double threshold = trial.threshold();
  const std::string weight = kind == CarlemanKind::Nrt ? "annulus" : "drift";
  const double rho4 = rho * rho * rho * rho;

  sink.open(rec.csv_path,
            {"phase[text]", "weight[text]", "dim[count]", "exponent[1]", "seed[index]",
             "lhs[weighted]", "rhs[weighted]", "ratio[1]", "threshold[1]", "constant[1]",
             "flagged[bool]", "verdict[text]"},
            true);
  for (const CarlemanRow& row : baseline.rows) {
    sink.row({"baseline", weight, fmti(total_dim), fmt(row.exponent), fmti(static_cast<long long>(row.seed)),
              fmt(row.lhs), fmt(row.rhs), fmt(row.ratio), fmt(baseline.threshold_tilde),
              fmt(baseline.constant_tilde), row.refine_flagged ? "true" : "false",
              "CALIBRATION"},
             row.refine_flagged ? RowVerdict::Fail : RowVerdict::Neutral);
  }
  const std::vector<CarlemanRow> rows = at_point("potential trial", [&] {
    return empirical_carleman(trial, exponents, seeds, ctx.exec);
  });
  for (const CarlemanRow& row : rows) {
    const double normalized = kind == CarlemanKind::Nrt ? row.ratio / rho4 : row.ratio;
    const bool applicable = row.exponent >= threshold * (1.0 - 1e-12);
    std::string verdict;
    RowVerdict rv = RowVerdict::Neutral;
    if (!applicable) {
      verdict = "BELOW-THRESHOLD";
    } else {
      const bool ok =
          normalized <= screen_factor * baseline.constant_tilde && !row.refine_flagged;
      verdict = pass_text(ok);
      rv = ok ? RowVerdict::Pass : RowVerdict::Fail;
    }
    sink.row({"trial", weight, fmti(total_dim), fmt(row.exponent), fmti(static_cast<long long>(row.seed)),
              fmt(row.lhs), fmt(row.rhs), fmt(row.ratio), fmt(threshold),
              fmt(baseline.constant_tilde), row.refine_flagged ? "true" : "false", verdict},
             rv);
  }
  meta["potential"] = trivial ? "zero" : v.name();
  meta["rho"] = fmt(rho);
  meta["sigma"] = fmt(sigma);
  meta["threshold_tilde"] = fmt(baseline.threshold_tilde);
  meta["constant_tilde"] = fmt(baseline.constant_tilde);
  meta["threshold"] = fmt(threshold);
  meta["screen_factor"] = fmt(screen_factor);
  meta["lambda1"] = fmt(trial.lambda1);
  meta["lambda2"] = fmt(trial.lambda2);
}

void run_control(ConfigReader& r, const RunContext& ctx, ResultRecord& rec,
                 ordered_json& meta, Sink& sink) {
  const Domain domain = read_domain(r);
  const Grid grid = read_grid(r, domain, 48);
  const Potential v = read_potential(r, domain);
  const ConstantsPlan cplan = read_constants_plan(r);

  const double g = r.number_or("control", "G", 1.0);
  if (!(g > 0.0)) r.complain("[control] G must be positive");
  std::vector<double> ratios = r.numbers_or("control", "delta_over_g", {0.05, 0.1, 0.2});
  if (ratios.empty()) r.complain("[control] delta_over_g list must be non-empty");
  for (double x : ratios)
    if (!(x > 0.0 && x < 0.5))
      r.complain("[control] delta_over_g = " + fmt(x) +
                 " rejected: the sensor set needs 0 < delta < G/2");
  std::vector<double> horizons = r.numbers_or("control", "horizon", {0.25, 1.0, 4.0});
  if (horizons.empty()) r.complain("[control] horizon list must be non-empty");
  for (double t : horizons)
    if (!(t > 0.0)) r.complain("[control] horizons must be positive");
  const std::optional<double> trunc = r.number("control", "truncation_energy");
  if (!trunc) r.complain("[control] truncation_energy is required");
  const long long n_time = r.integer_or("control", "time_panels", 256);
  if (n_time < 2 || n_time % 2 != 0)
    r.complain("[control] time_panels must be even and >= 2");
  const std::optional<double> fixed_k = r.number("control", "scale_constant");
  if (fixed_k && !(*fixed_k > 0.0)) r.complain("[control] scale_constant must be positive");
  // Default to the tightest swept radius: costs peak there, so the constant
  // calibrated at that point dominates the rest of the sweep.
  double calib_ratio = r.number_or("control", "calibration_delta_over_g",
                                   ratios.empty() ? 0.05 : *std::min_element(ratios.begin(),
                                                                             ratios.end()));
  if (!(calib_ratio > 0.0 && calib_ratio < 0.5))
    r.complain("[control] calibration_delta_over_g needs 0 < delta < G/2");
  const double residual_tol = r.number_or("tolerances", "terminal_residual", 1e-6);
  if (!(residual_tol > 0.0)) r.complain("[tolerances] terminal_residual must be positive");
  finish_or_throw(r);
  if (ctx.dry) return;

  const DiscretizedHamiltonian h = assemble_hamiltonian(grid, sample_on_grid(v, grid));
  const AdmissibilityConstants lam = resolve_constants(cplan, v, grid, ctx.seed);
  const double kappa = h.min_eigenvalue();
  const double kappa_minus = std::min(kappa, 0.0);
  const Eigen::VectorXd u0 =
      sample_subspace(h, *trunc, SampleMode::RandomMix, derive_seed(ctx.seed, 0xc0)).values;

  auto solve_at = [&](double delta, double horizon) {
    ControlProblem problem{h,
                           build_set(grid, g, delta, Placement::Center,
                                     derive_seed(ctx.seed, 0x5e7)),
                           horizon, u0, *trunc};
    return synthesize_control(problem, static_cast<int>(n_time), ctx.exec);
  };

  double k_used = 0.0;
  bool calibrated = false;
  if (fixed_k) {
    k_used = *fixed_k;
  } else {
    std::vector<CostSample> samples;
    for (double horizon : horizons) {
      at_point("calibration at horizon=" + fmt(horizon), [&] {
        const ControlResult res = solve_at(calib_ratio * g, horizon);
        if (res.cost > 0.0) samples.push_back({horizon, res.cost});
      });
    }
    if (samples.empty())
      throw std::runtime_error("calibration produced no positive-cost samples");
    k_used = calibrate_cost_constant(g, calib_ratio * g, lam.lambda1, lam.lambda2,
                                     kappa_minus, samples) *
             (1.0 + 1e-9);
    calibrated = true;
  }

  sink.open(rec.csv_path,
            {"potential[name]", "G[length]", "delta[length]", "horizon[time]",
             "modes[count]", "cost[norm]", "bound[norm]", "residual[1]", "K_used[1]",
             "regularized[bool]", "verdict[text]"},
            true);
  for (double ratio : ratios) {
    for (double horizon : horizons) {
      const double delta = ratio * g;
      at_point("delta_over_g=" + fmt(ratio) + ", horizon=" + fmt(horizon), [&] {
        const ControlResult res = solve_at(delta, horizon);
        CostBoundParams params;
        params.scale_constant = k_used;
        params.coarseness = g;
        params.delta = delta;
        params.lambda1 = lam.lambda1;
        params.lambda2 = lam.lambda2;
        params.horizon = horizon;
        params.kappa_minus = kappa_minus;
        const double bound = cost_bound(params);
        const bool ok = res.cost <= bound && res.terminal_residual <= residual_tol;
        sink.row({v.name(), fmt(g), fmt(delta), fmt(horizon), fmti(res.modes),
                  fmt(res.cost), fmt(bound), fmt(res.terminal_residual), fmt(k_used),
                  res.regularized ? "true" : "false", pass_text(ok)},
                 ok ? RowVerdict::Pass : RowVerdict::Fail);
      });
    }
  }
  meta["scale_constant"] = fmt(k_used);
  meta["calibrated"] = calibrated;
  meta["kappa"] = fmt(kappa);
  meta["kappa_minus"] = fmt(kappa_minus);
  meta["time_panels"] = fmti(n_time);
  meta["truncation_energy"] = fmt(*trunc);
  meta["lambda1"] = fmt(lam.lambda1);
  meta["lambda2"] = fmt(lam.lambda2);
}

RandomEnsemble read_ensemble(ConfigReader& r, std::uint64_t seed) {
  RandomEnsemble ens;
  const long long dim = r.integer_or("ensemble", "dim", 1);
  if (dim < 1 || dim > 3) r.complain("[ensemble] dim must be 1, 2, or 3");
  ens.dim = static_cast<int>(std::clamp<long long>(dim, 1, 3));
  const std::string bc = r.word_or("ensemble", "bc", "dirichlet");
  try {
    ens.bc = bc_from_name(bc);
  } catch (const std::exception& e) {
    r.complain(std::string("[ensemble] bc: ") + e.what());
  }
  const long long cells = r.integer_or("ensemble", "cells", 8);
  if (cells < 1) r.complain("[ensemble] cells must be >= 1");
  ens.cells_per_axis = static_cast<int>(std::max<long long>(cells, 1));
  const long long npc = r.integer_or("ensemble", "nodes_per_cell", 8);
  if (npc < 3) r.complain("[ensemble] nodes_per_cell must be >= 3");
  ens.nodes_per_cell = static_cast<int>(std::max<long long>(npc, 3));
  const std::string shape = r.word_or("ensemble", "shape", "bump");
  ens.shape.kind = SiteShape::Kind::Bump;
  if (shape == "indicator")
    ens.shape.kind = SiteShape::Kind::CellIndicator;
  else if (shape != "bump")
    r.complain("[ensemble] shape must be 'bump' or 'indicator'");
  ens.shape.amplitude = r.number_or("ensemble", "amplitude", 1.6);
  ens.shape.radius = r.number_or("ensemble", "radius", 0.45);
  if (!(ens.shape.amplitude > 0.0)) r.complain("[ensemble] amplitude must be positive");
  if (!(ens.shape.radius > 0.0 && ens.shape.radius <= 0.5))
    r.complain("[ensemble] radius must lie in (0, 0.5]");
  const double ball = r.number_or("ensemble", "ball_radius", 0.2);
  if (!(ball > 0.0 && ball < 0.5)) {
    r.complain("[ensemble] ball_radius must lie in (0, 0.5)");
  } else if (r.clean() && !shape_covers_ball(ens.shape, ens.dim, ball)) {
    r.complain("[ensemble] the site shape fails to dominate 1 on the radius-" + fmt(ball) +
               " ball around the cell midpoint");
  }
  Domain box;
  box.dim = ens.dim;
  for (int a = 0; a < ens.dim; ++a) {
    box.lo[a] = 0.0;
    box.hi[a] = ens.cells_per_axis;
    box.bc[a] = ens.bc;
  }
  ens.base = read_potential(r, box);
  ens.master_seed = seed;
  return ens;
}

void run_wegner(ConfigReader& r, const RunContext& ctx, ResultRecord& rec,
                ordered_json& meta, Sink& sink) {
  RandomEnsemble ens = read_ensemble(r, ctx.seed);
  EigenvalueCountOptions opts;
  const std::optional<double> energy = r.number("wegner", "energy");
  const std::optional<double> cap = r.number("wegner", "energy_cap");
  if (!energy) r.complain("[wegner] energy is required");
  if (!cap) r.complain("[wegner] energy_cap is required");
  opts.energy = energy.value_or(0.0);
  opts.energy_cap = cap.value_or(0.0);
  opts.epsilons = r.numbers_or("wegner", "epsilons", {});
  if (opts.epsilons.empty()) r.complain("[wegner] epsilons list is required and non-empty");
  std::vector<long long> boxes = r.integers_or("wegner", "boxes", {});
  if (boxes.empty()) r.complain("[wegner] boxes list is required and non-empty");
  for (long long l : boxes) {
    if (l < 1) r.complain("[wegner] box sizes must be >= 1");
    opts.box_sizes.push_back(static_cast<int>(l));
  }
  opts.samples = static_cast<int>(r.integer_or("wegner", "samples", 400));
  for (std::size_t i = 0; i < opts.epsilons.size(); ++i) {
    if (!(opts.epsilons[i] > 0.0)) {
      r.complain("[wegner] epsilons must be positive");
      break;
    }
    if (i > 0 && opts.epsilons[i] <= opts.epsilons[i - 1]) {
      r.complain("[wegner] epsilons must be strictly ascending");
      break;
    }
  }
  if (opts.samples < 50) r.complain("[wegner] samples must be >= 50");
  if (energy && cap && !opts.epsilons.empty() &&
      !(opts.energy + 3.0 * opts.epsilons.back() <= opts.energy_cap))
    r.complain("[wegner] the count window must satisfy energy + 3*max(epsilons) <= energy_cap");
  finish_or_throw(r);
  if (ctx.dry) return;

  const EigenvalueCountResult res =
      at_point("count sweep", [&] { return wegner_experiment(ens, opts, ctx.exec); });

  sink.open(rec.csv_path,
            {"experiment[text]", "L[cells]", "epsilon[energy]", "M[count]", "statistic[1]",
             "stderr[1]", "fit[1]", "verdict[text]"},
            true);
  const bool have_fit = res.fit_points >= 2;
  for (std::size_t li = 0; li < opts.box_sizes.size(); ++li) {
    for (std::size_t e = 0; e < opts.epsilons.size(); ++e) {
      const double eps = opts.epsilons[e];
      const double fit_value =
          have_fit ? std::exp(res.log_c + res.tau * std::log(eps)) *
                         std::pow(opts.box_sizes[li], ens.dim)
                   : 0.0;
      sink.row({"count-mean", fmti(opts.box_sizes[li]), fmt(eps), fmti(opts.samples),
                fmt(res.mean_at(static_cast<int>(li), static_cast<int>(e))),
                fmt(res.std_error_at(static_cast<int>(li), static_cast<int>(e))),
                have_fit ? fmt(fit_value) : "", ""},
               RowVerdict::Neutral);
    }
  }
  sink.row({"fit", "", "", fmti(opts.samples), fmt(res.tau), fmt(res.tau_std_error),
            fmt(res.r_squared), res.verdict},
           res.pass ? RowVerdict::Pass : RowVerdict::Fail);
  meta["tau"] = fmt(res.tau);
  meta["tau_std_error"] = fmt(res.tau_std_error);
  meta["log_c"] = fmt(res.log_c);
  meta["r_squared"] = fmt(res.r_squared);
  meta["verdict"] = res.verdict;
  meta["hypothesis_note"] = res.hypothesis_note;
}

void run_ils(ConfigReader& r, const RunContext& ctx, ResultRecord& rec, ordered_json& meta,
             Sink& sink) {
  RandomEnsemble ens = read_ensemble(r, ctx.seed);
  SpectralAvoidanceOptions opts;
  const std::optional<double> base = r.number("ils", "interval_base");
  if (!base) r.complain("[ils] interval_base is required");
  opts.interval_base = base.value_or(0.0);
  opts.alpha = r.number_or("ils", "alpha", 0.5);
  opts.decay_q = r.number_or("ils", "q", 1.0);
  opts.samples = static_cast<int>(r.integer_or("ils", "samples", 200));
  std::vector<long long> boxes = r.integers_or("ils", "boxes", {});
  if (boxes.empty()) r.complain("[ils] boxes list is required and non-empty");
  for (long long l : boxes) {
    if (l < 2) r.complain("[ils] box sizes must be >= 2");
    opts.box_sizes.push_back(static_cast<int>(l));
  }
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0))
    r.complain("[ils] alpha must lie in (0,1)");
  if (!(opts.decay_q > 0.0)) r.complain("[ils] q must be positive");
  if (opts.samples < 1) r.complain("[ils] samples must be >= 1");
  const std::string precheck = r.word_or("ils", "precheck", "require");
  if (precheck == "report")
    opts.precheck = GapPrecheck::ReportOnly;
  else if (precheck != "require")
    r.complain("[ils] precheck must be 'require' or 'report'");
  finish_or_throw(r);
  if (ctx.dry) return;

  const SpectralAvoidanceResult res =
      at_point("avoidance sweep", [&] { return ils_experiment(ens, opts, ctx.exec); });

  sink.open(rec.csv_path,
            {"experiment[text]", "L[cells]", "width[energy]", "M[count]", "statistic[1]",
             "stderr[1]", "wilson_low[1]", "threshold[1]", "verdict[text]"},
            true);
  for (std::size_t li = 0; li < opts.box_sizes.size(); ++li) {
    const bool row_ok = res.p_hat[li] >= res.thresholds[li] - 2.0 * res.std_errors[li];
    sink.row({"avoidance", fmti(opts.box_sizes[li]), fmt(res.widths[li]),
              fmti(opts.samples), fmt(res.p_hat[li]), fmt(res.std_errors[li]),
              fmt(res.wilson_low[li]), fmt(res.thresholds[li]), pass_text(row_ok)},
             row_ok ? RowVerdict::Pass : RowVerdict::Fail);
  }
  if (!res.precheck_ok && opts.precheck == GapPrecheck::ReportOnly) {
    // The negative control runs with a failed precheck by design; report it
    // without failing the row set.
    meta["precheck_offending_t"] = fmt(res.precheck_offending_t);
  }
  meta["interval_base"] = fmt(opts.interval_base);
  meta["alpha"] = fmt(opts.alpha);
  meta["q"] = fmt(opts.decay_q);
  meta["precheck_ok"] = res.precheck_ok;
  meta["l0"] = fmti(res.l0);
  meta["verdict"] = res.verdict;
  meta["hypothesis_note"] = res.hypothesis_note;
}

void run_lifting(ConfigReader& r, const RunContext& ctx, ResultRecord& rec,
                 ordered_json& meta, Sink& sink) {
  RandomEnsemble ens = read_ensemble(r, ctx.seed);
  LiftingOptions opts;
  opts.sample_index = static_cast<std::uint64_t>(r.integer_or("lifting", "sample_index", 0));
  opts.epsilons = r.numbers_or("lifting", "epsilons", {});
  if (opts.epsilons.empty()) r.complain("[lifting] epsilons list is required and non-empty");
  const std::optional<double> cap = r.number("lifting", "energy_cap");
  if (!cap) r.complain("[lifting] energy_cap is required");
  opts.energy_cap = cap.value_or(0.0);
  opts.max_levels = static_cast<int>(r.integer_or("lifting", "max_levels", 8));
  if (opts.max_levels < 1) r.complain("[lifting] max_levels must be >= 1");
  for (std::size_t i = 0; i < opts.epsilons.size(); ++i) {
    if (!(opts.epsilons[i] > 0.0 && opts.epsilons[i] <= 1.0)) {
      r.complain("[lifting] epsilons must lie in (0,1]");
      break;
    }
    if (i > 0 && opts.epsilons[i] <= opts.epsilons[i - 1]) {
      r.complain("[lifting] epsilons must be strictly ascending");
      break;
    }
  }
  finish_or_throw(r);
  if (ctx.dry) return;

  const LiftingResult res =
      at_point("lifting sweep", [&] { return lifting_check(ens, opts); });

  sink.open(rec.csv_path,
            {"experiment[text]", "level[index]", "epsilon[1]", "base_energy[energy]",
             "lift[energy]", "rayleigh[energy]", "exponent[1]", "verdict[text]"},
            true);
  const std::size_t n_eps = opts.epsilons.size();
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const LiftingRow& row = res.rows[i];
    const std::size_t level_index = i / n_eps;
    const bool ok = row.lift > 0.0 && res.monotone;
    sink.row({"lifting", fmti(row.level), fmt(row.epsilon), fmt(row.base_energy),
              fmt(row.lift), fmt(res.rayleigh_sup[level_index]),
              fmt(res.fitted_exponents[level_index]), pass_text(ok)},
             ok ? RowVerdict::Pass : RowVerdict::Fail);
  }
  meta["monotone"] = res.monotone;
  meta["sample_index"] = fmti(static_cast<long long>(opts.sample_index));
  meta["levels"] = fmti(static_cast<long long>(res.levels.size()));
}

// ---------------------------------------------------------------------------

int column_index(const std::vector<std::string>& columns, const std::string& name) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const std::string& c = columns[i];
    if (c == name || c.substr(0, c.find('[')) == name) return static_cast<int>(i);
  }
  throw std::runtime_error("result set has no column named '" + name + "'");
}

double cell_number(const std::string& cell) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size())
    throw std::runtime_error("cell '" + cell + "' is not numeric");
  return v;
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "ucp",     "ghost", "carleman-nrt", "carleman-lr", "control",
      "wegner",  "ils",   "lifting",      "constants"};
  return kinds;
}

std::vector<std::string> validate_config(const Config& config) {
  RunOverrides overrides;
  overrides.dry_run = true;
  overrides.exec = par::Exec::Serial;
  try {
    run_experiment(config, overrides);
  } catch (const ConfigError& e) {
    return e.problems();
  } catch (const std::exception& e) {
    return {e.what()};
  }
  return {};
}

ResultRecord run_experiment(const Config& config, const RunOverrides& overrides) {
  const auto start = std::chrono::steady_clock::now();
  ConfigReader reader(config);

  ResultRecord rec;
  rec.digest = config.digest_hex();
  rec.kind = reader.word_or("", "kind", "");
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), rec.kind) == kinds.end()) {
    std::string list;
    for (const std::string& k : kinds) list += (list.empty() ? "" : ", ") + k;
    reader.complain("'kind' must be one of: " + list);
  }
  const std::string label = reader.word_or("", "label", rec.kind.empty() ? "run" : rec.kind);
  const std::string out =
      overrides.out_dir.value_or(reader.word_or("", "out", "results"));
  const long long seed_key = reader.integer_or("", "seed", 1);
  if (seed_key < 0) reader.complain("'seed' must be >= 0");
  rec.seed = overrides.seed.value_or(static_cast<std::uint64_t>(std::max<long long>(seed_key, 0)));
  const long long jobs_key = reader.integer_or("", "jobs", 0);
  if (jobs_key < 0) reader.complain("'jobs' must be >= 0");
  if (!overrides.dry_run) {
    if (overrides.jobs)
      par::set_jobs(*overrides.jobs);
    else if (jobs_key > 0)
      par::set_jobs(static_cast<int>(jobs_key));
  }
  if (!reader.clean()) throw ConfigError(reader.finish());

  rec.csv_path = fs::path(out) / (label + ".csv");
  rec.json_path = fs::path(out) / (label + ".json");

  RunContext ctx;
  ctx.seed = rec.seed;
  ctx.exec = overrides.exec;
  ctx.dry = overrides.dry_run;

  Sink sink;
  ordered_json meta = ordered_json::object();
  if (rec.kind == "constants")
    run_constants(reader, ctx, rec, meta, sink);
  else if (rec.kind == "ucp")
    run_ucp(reader, ctx, rec, meta, sink);
  else if (rec.kind == "ghost")
    run_ghost(reader, ctx, rec, meta, sink);
  else if (rec.kind == "carleman-nrt")
    run_carleman(reader, ctx, rec, meta, sink, CarlemanKind::Nrt);
  else if (rec.kind == "carleman-lr")
    run_carleman(reader, ctx, rec, meta, sink, CarlemanKind::Lr);
  else if (rec.kind == "control")
    run_control(reader, ctx, rec, meta, sink);
  else if (rec.kind == "wegner")
    run_wegner(reader, ctx, rec, meta, sink);
  else if (rec.kind == "ils")
    run_ils(reader, ctx, rec, meta, sink);
  else if (rec.kind == "lifting")
    run_lifting(reader, ctx, rec, meta, sink);

  sink.close();
  rec.table = sink.table();
  rec.all_pass = sink.all_pass();
  write_json_mirror(rec, meta, !ctx.dry);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::string plotdata_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("result file is not valid JSON: ") + e.what());
  }
  const std::string kind = j.value("kind", "");
  const std::vector<std::string> columns = j.at("columns").get<std::vector<std::string>>();
  const auto& rows = j.at("rows");
  if (rows.empty()) throw std::runtime_error("result set has no rows to plot");

  auto cell = [&](const ordered_json& row, int idx) {
    return row.at(static_cast<std::size_t>(idx)).get<std::string>();
  };
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "\t" : "") << cells[i];
    out << "\n";
  };

  if (kind == "ucp") {
    const int ci_g = column_index(columns, "G");
    const int ci_d = column_index(columns, "delta");
    const int ci_o = column_index(columns, "observed");
    const int ci_p = column_index(columns, "predicted");
    emit({"delta_over_g", "observed", "predicted"});
    for (const auto& row : rows)
      emit({fmt(cell_number(cell(row, ci_d)) / cell_number(cell(row, ci_g))),
            cell(row, ci_o), cell(row, ci_p)});
  } else if (kind == "control") {
    const int ci_g = column_index(columns, "G");
    const int ci_d = column_index(columns, "delta");
    const int ci_t = column_index(columns, "horizon");
    const int ci_c = column_index(columns, "cost");
    const int ci_b = column_index(columns, "bound");
    emit({"delta_over_g", "horizon", "cost", "bound"});
    for (const auto& row : rows)
      emit({fmt(cell_number(cell(row, ci_d)) / cell_number(cell(row, ci_g))),
            cell(row, ci_t), cell(row, ci_c), cell(row, ci_b)});
  } else if (kind == "wegner") {
    const int ci_e = column_index(columns, "experiment");
    const int ci_l = column_index(columns, "L");
    const int ci_eps = column_index(columns, "epsilon");
    const int ci_s = column_index(columns, "statistic");
    const int ci_se = column_index(columns, "stderr");
    const int ci_f = column_index(columns, "fit");
    emit({"epsilon", "L", "mean", "stderr", "fit"});
    for (const auto& row : rows)
      if (cell(row, ci_e) == "count-mean")
        emit({cell(row, ci_eps), cell(row, ci_l), cell(row, ci_s), cell(row, ci_se),
              cell(row, ci_f)});
  } else if (kind == "ghost") {
    const int ci_t = column_index(columns, "tau");
    const int ci_e = column_index(columns, "energy");
    const int ci_r = column_index(columns, "spectral_residual");
    const int ci_o = column_index(columns, "fd_order");
    emit({"tau", "energy", "spectral_residual", "fd_order"});
    for (const auto& row : rows)
      emit({cell(row, ci_t), cell(row, ci_e), cell(row, ci_r), cell(row, ci_o)});
  } else if (kind == "carleman-nrt" || kind == "carleman-lr") {
    const int ci_p = column_index(columns, "phase");
    const int ci_a = column_index(columns, "exponent");
    const int ci_s = column_index(columns, "seed");
    const int ci_r = column_index(columns, "ratio");
    const int ci_th = column_index(columns, "threshold");
    const int ci_c = column_index(columns, "constant");
    emit({"phase", "exponent", "seed", "ratio", "threshold", "constant"});
    for (const auto& row : rows)
      emit({cell(row, ci_p), cell(row, ci_a), cell(row, ci_s), cell(row, ci_r),
            cell(row, ci_th), cell(row, ci_c)});
  } else if (kind == "ils") {
    const int ci_l = column_index(columns, "L");
    const int ci_w = column_index(columns, "width");
    const int ci_p = column_index(columns, "statistic");
    const int ci_wl = column_index(columns, "wilson_low");
    const int ci_th = column_index(columns, "threshold");
    emit({"L", "width", "p_hat", "wilson_low", "threshold"});
    for (const auto& row : rows)
      emit({cell(row, ci_l), cell(row, ci_w), cell(row, ci_p), cell(row, ci_wl),
            cell(row, ci_th)});
  } else if (kind == "lifting") {
    const int ci_k = column_index(columns, "level");
    const int ci_e = column_index(columns, "epsilon");
    const int ci_l = column_index(columns, "lift");
    const int ci_r = column_index(columns, "rayleigh");
    emit({"level", "epsilon", "lift", "rayleigh"});
    for (const auto& row : rows)
      emit({cell(row, ci_k), cell(row, ci_e), cell(row, ci_l), cell(row, ci_r)});
  } else if (kind == "constants") {
    const int ci_p = column_index(columns, "potential");
    const int ci_1 = column_index(columns, "lambda1");
    const int ci_2 = column_index(columns, "lambda2");
    emit({"potential", "lambda1", "lambda2"});
    for (const auto& row : rows)
      emit({cell(row, ci_p), cell(row, ci_1), cell(row, ci_2)});
  } else {
    throw std::runtime_error("no plot-data mapping for experiment kind '" + kind + "'");
  }
  return out.str();
}

}  // namespace uclab
