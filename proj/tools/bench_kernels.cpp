// Times the OpenMP kernels against their serial reference and checks that
// both produce bitwise identical results. Exit status 1 on any mismatch.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "uclab/carleman.hpp"
#include "uclab/control.hpp"
#include "uclab/equidistributed.hpp"
#include "uclab/ghost.hpp"
#include "uclab/operators.hpp"
#include "uclab/parallel.hpp"
#include "uclab/potentials.hpp"
#include "uclab/subspace.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = Clock::now();
    fn();
    const auto t1 = Clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool bitwise_equal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

struct Row {
  std::string name;
  double serial_ms = 0.0;
  double openmp_ms = 0.0;
  bool match = false;
};

void print_rows(const std::vector<Row>& rows) {
  std::printf("%-24s %12s %12s %9s %6s\n", "kernel", "serial[ms]", "openmp[ms]",
              "speedup", "match");
  for (const auto& r : rows) {
    std::printf("%-24s %12.2f %12.2f %8.2fx %6s\n", r.name.c_str(), r.serial_ms,
                r.openmp_ms, r.serial_ms / std::max(r.openmp_ms, 1e-9),
                r.match ? "yes" : "NO");
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace uclab;
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  std::vector<Row> rows;

  {  // coverage weights on a fine 2D grid
    const Domain dom = Domain::make(std::array{0.0, 0.0}, std::array{2.0, 2.0},
                                    std::array{Bc::Neumann, Bc::Neumann});
    const Grid grid = build_grid(dom, std::array{192, 192});
    const EquidistributedSet set = build_set(grid, 0.5, 0.2, Placement::SeededRandom, 7);
    Eigen::VectorXd ws, wp;
    Row r{"node_weights 192^2"};
    r.serial_ms = time_ms(
        [&] {
          ws = node_weights_kernel(grid, set.centers, set.cells, set.G, set.delta,
                                   par::Exec::Serial);
        },
        reps);
    r.openmp_ms = time_ms(
        [&] {
          wp = node_weights_kernel(grid, set.centers, set.cells, set.G, set.delta,
                                   par::Exec::OpenMP);
        },
        reps);
    r.match = bitwise_equal(ws, wp);
    rows.push_back(r);
  }

  {  // time-slab extension of a spectral mix
    const Grid grid = build_grid(Domain::interval(0.0, 1.0, Bc::Dirichlet),
                                 std::array{500});
    const Eigen::VectorXd v = sample_on_grid(Potential::zero(1), grid);
    const DiscretizedHamiltonian h = assemble_hamiltonian(grid, v);
    const SubspaceFunction psi =
        sample_subspace(h, 2.0e4, SampleMode::RandomMix, 11);
    const AdmissibilityConstants c{0.0, 0.0, AdmissibilityConstants::Provenance::Analytic, ""};
    GhostExtension es, ep;
    Row r{"build_extension n_t=257"};
    r.serial_ms = time_ms(
        [&] { es = build_extension(psi, h.eigensystem(), 0.5, 257, c, par::Exec::Serial); },
        reps);
    r.openmp_ms = time_ms(
        [&] { ep = build_extension(psi, h.eigensystem(), 0.5, 257, c, par::Exec::OpenMP); },
        reps);
    r.match = bitwise_equal(es.values, ep.values);
    rows.push_back(r);
  }

  {  // weighted inequality quadrature
    CarlemanTrial trial;
    trial.kind = CarlemanKind::Nrt;
    trial.total_dim = 2;
    trial.rho = 0.3;
    trial.resolution = 96;
    const std::vector<double> sweep{2.0, 4.0, 6.0};
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    std::vector<CarlemanRow> rs, rp;
    Row r{"empirical_carleman 2d"};
    r.serial_ms =
        time_ms([&] { rs = empirical_carleman(trial, sweep, seeds, par::Exec::Serial); }, reps);
    r.openmp_ms =
        time_ms([&] { rp = empirical_carleman(trial, sweep, seeds, par::Exec::OpenMP); }, reps);
    r.match = rs.size() == rp.size();
    for (std::size_t i = 0; r.match && i < rs.size(); ++i)
      r.match = std::memcmp(&rs[i].lhs, &rp[i].lhs, sizeof(double)) == 0 &&
                std::memcmp(&rs[i].rhs, &rp[i].rhs, sizeof(double)) == 0;
    rows.push_back(r);
  }

  {  // observability Gramian over truncated heat modes
    const Domain dom = Domain::make(std::array{0.0, 0.0}, std::array{2.0, 2.0},
                                    std::array{Bc::Dirichlet, Bc::Dirichlet});
    const Grid grid = build_grid(dom, std::array{24, 24});
    const Eigen::VectorXd v = sample_on_grid(Potential::zero(2), grid);
    ControlProblem problem;
    problem.h = assemble_hamiltonian(grid, v);
    problem.set = build_set(grid, 1.0, 0.25, Placement::Center);
    problem.horizon = 1.0;
    problem.truncation_energy = 400.0;
    problem.u0 = Eigen::VectorXd::Ones(grid.total());
    problem.h.eigensystem();  // pay the eigensolve outside the timed region
    Eigen::MatrixXd gs, gp;
    Row r{"gramian n_time=512"};
    r.serial_ms = time_ms([&] { gs = gramian(problem, 512, par::Exec::Serial); }, reps);
    r.openmp_ms = time_ms([&] { gp = gramian(problem, 512, par::Exec::OpenMP); }, reps);
    r.match = bitwise_equal(gs, gp);
    rows.push_back(r);
  }

  print_rows(rows);
  for (const auto& r : rows)
    if (!r.match) {
      std::fprintf(stderr, "kernel '%s' differs between execution modes\n", r.name.c_str());
      return 1;
    }
  return 0;
}
