#pragma once

#include <array>
#include <utility>
#include <vector>

#include "covband/quadrature.hpp"

namespace covband {

// Covariant band B = {k : ||k_mu k^mu| < Lambda^2}; geometry of the admissible
// (nu, k) domain.
struct BandRegion {
  double lambda_cutoff;
};

struct SpacetimeSeparation {
  double t;
  double r;
  double epsilon = 0.0;
};

struct DetectorSpec {
  double omega = 0.0;
  double tau = 1.0;
  double sigma = 0.5;
  double coupling = 1.0;
  std::array<double, 3> center{0.0, 0.0, 0.0};
};

struct CorrelatorValue {
  cplx value;
  QuadEstimate estimate;
};

class SingularPointError : public QuadError {
 public:
  using QuadError::QuadError;
};

// Default lightcone exclusion zone: ||t|-r| <= 1e-3 * max(r,1).
bool on_lightcone_zone(const SpacetimeSeparation& sep);

// Closed form of the massless Wightman function
// D+(t,r) = -1/(4 pi^2 ((t - i eps)^2 - r^2)).
cplx wightman_massless(const SpacetimeSeparation& sep);

// Admissible nu set {nu : |(nu-k)^2 - k^2| < Lambda^2} as disjoint intervals.
std::vector<std::pair<double, double>> nu_band_intervals(double k,
                                                         const BandRegion& band);

// Band-projected time-ordered kernel K_Lambda(t,r).
CorrelatorValue bandlimited_timeordered_kernel(const SpacetimeSeparation& sep,
                                               const BandRegion& band,
                                               const QuadConfig& cfg = {});

// Pi_Lambda[f](t,r) for the 4D Gaussian f(x) = exp(-(t^2+r^2)/(2 w^2)),
// evaluated through its analytic Fourier transform restricted to the band.
double apply_band_projector_gaussian(double w, double t, double r,
                                     const BandRegion& band,
                                     const QuadConfig& cfg = {});

}  // namespace covband
