#include "uclab/ucp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uclab {

double exponent_prefactor(double G, double lambda1, double lambda2, double energy) {
  if (!(G > 0.0)) throw std::invalid_argument("scale G must be positive");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("form-bound constants must be nonnegative");
  const double g2 = G * G;
  return 1.0 + g2 * lambda1 + std::cbrt(g2 * g2 * lambda2) +
         std::sqrt(g2 * std::max(energy, 0.0));
}

double predicted_bound(const UcpParams& p) {
  if (!(p.delta > 0.0 && p.delta < p.G))
    throw std::invalid_argument("need 0 < delta < G");
  if (!(p.N > 0.0)) throw std::invalid_argument("calibration constant N must be positive");
  const double expnt =
      p.N * exponent_prefactor(p.G, p.lambda1, p.lambda2, p.energy);
  return std::pow(p.delta / p.G, expnt);
}

ObservabilityConstants observability_form(const UcpParams& p, double kappa) {
  if (!(p.delta > 0.0 && p.delta < p.G))
    throw std::invalid_argument("need 0 < delta < G");
  const double g2 = p.G * p.G;
  const double expnt =
      p.N * (1.0 + g2 * p.lambda1 + std::cbrt(g2 * g2 * p.lambda2));
  ObservabilityConstants c;
  c.d0 = std::pow(p.G / p.delta, expnt);
  c.d1 = p.N * p.G * std::log(p.G / p.delta);
  c.kappa_minus = std::min(kappa, 0.0);
  return c;
}

double calibrate_N(std::span<const CalibrationSample> samples) {
  if (samples.empty())
    throw std::invalid_argument("calibration needs at least one experiment");
  double n = 0.0;
  for (const auto& s : samples) {
    if (!(s.observed > 0.0 && s.observed <= 1.0))
      throw std::invalid_argument("observed ratios must lie in (0,1]");
    if (!(s.delta > 0.0 && s.delta < s.G))
      throw std::invalid_argument("need 0 < delta < G in every experiment");
    const double pref = exponent_prefactor(s.G, s.lambda1, s.lambda2, s.energy);
    n = std::max(n, std::log(s.observed) / (pref * std::log(s.delta / s.G)));
  }
  return n;
}

}  // namespace uclab
