#pragma once

#include <span>

namespace uclab {

// Parameters of the quantitative continuation bound
//   |psi|^2_{S} / |psi|^2 >= (delta/G)^{N * prefactor(G, lambda1, lambda2, E)}.
struct UcpParams {
  double N = 1.0;
  double G = 1.0;
  double delta = 0.1;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double energy = 0.0;
};

// 1 + G^2 lambda1 + (G^4 lambda2)^(1/3) + (G^2 max(E,0))^(1/2), arranged so
// the scaling (G,delta,lambda1,lambda2,E) -> (sG, s delta, lambda1/s^2,
// lambda2/s^4, E/s^2) reproduces the value bit for bit when s is a power of
// two.
double exponent_prefactor(double G, double lambda1, double lambda2, double energy);

double predicted_bound(const UcpParams& p);

// Constants of the observability reading of the same estimate:
//   d0 = (G/delta)^{N(1 + G^2 lambda1 + (G^4 lambda2)^{1/3})},
//   d1 = N * G * ln(G/delta),
// together with the negative part of the supplied spectral bottom.
struct ObservabilityConstants {
  double d0 = 1.0;
  double d1 = 0.0;
  double kappa_minus = 0.0;  // min(kappa, 0)
};
ObservabilityConstants observability_form(const UcpParams& p, double kappa);

struct CalibrationSample {
  double G = 1.0;
  double delta = 0.1;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double energy = 0.0;
  double observed = 1.0;  // measured mass ratio, in (0, 1]
};

// Smallest N that makes the predicted bound hold for every sample:
// max over samples of ln(observed) / (prefactor * ln(delta/G)).
double calibrate_N(std::span<const CalibrationSample> samples);

}  // namespace uclab
