#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uclab/domain.hpp"

namespace uclab {

// Constants (lambda1, lambda2) of the relative form bound
//   |V psi|^2 <= lambda1 |grad psi|^2 + lambda2 |psi|^2.
// Validity is what matters downstream; smaller is merely sharper.
struct AdmissibilityConstants {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  enum class Provenance { Analytic, Estimated } provenance = Provenance::Analytic;
  std::string grid_tag;  // set when estimated on a grid
};

inline AdmissibilityConstants analytic_bounded_constants(double sup_norm) {
  return {0.0, sup_norm * sup_norm, AdmissibilityConstants::Provenance::Analytic, ""};
}

// One-parameter family lambda1 = a*eps, lambda2 = a/eps + b, eps in (0,1].
struct SubclassScaling {
  double a = 0.0;
  double b = 0.0;
};
AdmissibilityConstants subclass_constants(const SubclassScaling& s, double epsilon);

// Constants valid on every axis-parallel sub-box of side length >= L0 once
// (lambda1, lambda2) hold on the whole space after reflection extension:
//   (2 * 3^d * lambda1, 3^d * (8 * lambda1 / L0^2 + lambda2)).
AdmissibilityConstants restriction_constants(double lambda1, double lambda2,
                                             double L0, int dim);

// Single-site profile for random potentials, supported in one unit cell.
struct SiteShape {
  enum class Kind { CellIndicator, Bump };
  Kind kind = Kind::Bump;
  double amplitude = 1.6;
  double radius = 0.45;  // bump support radius around the cell midpoint

  double eval(const Point& offset, int dim) const;  // offset within [0,1)^dim
  double sup() const { return amplitude; }
};

struct RandomSampleSpec {
  std::array<int, 3> cells{1, 1, 1};
  Point origin{0.0, 0.0, 0.0};
  SiteShape shape;
  std::vector<double> couplings;  // flat, axis 0 fastest, each in [0,1]
};

class Potential {
 public:
  enum class Kind { Bounded, PowerSingularity, RandomSample, Sum };

  static Potential zero(int dim);
  static Potential constant(int dim, double value);
  static Potential bounded(int dim, std::string name,
                           std::function<double(const Point&)> f, double sup_norm);
  // |x - center|^(-gamma), capped pointwise. gamma must satisfy the
  // integrability thresholds: gamma < 1/2 in one dimension, gamma < 1 in
  // two or three.
  static Potential power_singularity(int dim, Point center, double gamma, double cap);
  static Potential random_sample(int dim, RandomSampleSpec spec);
  static Potential sum(std::vector<Potential> parts);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  bool is_singular() const;
  std::optional<double> sup_bound() const;
  double evaluate(const Point& x) const;

 private:
  Potential() = default;
  struct BoundedPart {
    std::function<double(const Point&)> f;
    double sup_norm = 0.0;
  };
  struct PowerPart {
    Point center{0, 0, 0};
    double gamma = 0.0;
    double cap = 1e6;
  };
  Kind kind_ = Kind::Bounded;
  int dim_ = 1;
  std::string name_ = "zero";
  std::shared_ptr<const BoundedPart> bounded_;
  std::shared_ptr<const PowerPart> power_;
  std::shared_ptr<const RandomSampleSpec> random_;
  std::shared_ptr<const std::vector<Potential>> parts_;
};

// One value per grid node. Kinds with a singular part are cell-averaged
// over 5^d midpoint subsamples (cap applied pointwise before averaging);
// everything else is evaluated at the node.
Eigen::VectorXd sample_on_grid(const Potential& v, const Grid& grid);

struct EstimateOptions {
  double lambda2_weight = 1.0;  // selection score: lambda1 + w * cbrt(lambda2)
  int probe_vectors = 100;
  std::uint64_t probe_seed = 0x61646d70ull;
};

// Estimated (lambda1, lambda2) valid for the sampled potential on this grid
// against the natural-boundary stiffness form. Scans the lambda2 candidates,
// solves the constrained extremal problem for the smallest valid lambda1,
// picks the best scoring feasible pair, then verifies the inequality on
// seeded random probe vectors (inflating slightly until no violations).
AdmissibilityConstants estimate_constants(const Potential& v, const Grid& grid,
                                          std::span<const double> lambda2_grid,
                                          const EstimateOptions& opts = {});

// Count of probe vectors violating the form bound; zero for valid constants.
int count_form_bound_violations(const Eigen::VectorXd& samples, const Grid& grid,
                                const AdmissibilityConstants& c, int vectors,
                                std::uint64_t seed);

// Even reflection through every Dirichlet/Neumann face and periodic copy
// along periodic axes, producing samples on the tripled box with identical
// spacing. Node positions that land exactly on a reflection hyperplane take
// the adjacent sample.
struct ExtensionResult {
  Grid grid;
  Eigen::VectorXd values;
};
ExtensionResult extend_by_reflection(const Eigen::VectorXd& samples, const Grid& grid);

// Named potential instances used by experiments and tests.
std::vector<Potential> catalog_potentials(const Domain& domain);

}  // namespace uclab
