#pragma once

#include <limits>
#include <vector>

#include "covband/field.hpp"
#include "covband/quadrature.hpp"

namespace covband {

// Lambda = infinity() is the first-class sentinel dispatching to the
// unrestricted (non-cutoff) reduction.
inline constexpr double kLambdaInf = std::numeric_limits<double>::infinity();

// Quantities carrying the exact common prefactor lambda^2 e^{-tau^2 Omega^2}
// are also exposed in scaled form with that prefactor divided out: at large
// Omega the prefactor underflows double precision while signs, zeros and all
// ratios of interest are unchanged.
struct HarvestPoint {
  double r;
  double omega;
  double lambda_cutoff;
  double L;        // local noise (true value; may underflow to 0)
  cplx M;          // nonlocal term (true value; may underflow to 0)
  double N2;
  double N;
  double L_scaled;
  cplx M_scaled;   // Omega-free
  double N2_scaled;
  double N_scaled;
  std::vector<QuadEstimate> estimates;
};

struct BoundaryResult {
  double omega;
  double lambda_cutoff;
  double r_star;
  double r_lo;
  double r_hi;
  int iterations;
  int scan_points;
};

struct RScan {
  double r_min;
  double r_max;
  int n;
};

struct MCEstimate {
  cplx value;
  double std_error;
  long samples;
};

class BoundaryNotFound : public QuadError {
 public:
  BoundaryNotFound(const std::string& what, double n2_min, double n2_max)
      : QuadError(what), n2_min(n2_min), n2_max(n2_max) {}
  double n2_min;
  double n2_max;
};

double local_noise(const DetectorSpec& det, const QuadConfig& cfg = {});
double local_noise_scaled(const DetectorSpec& det, const QuadConfig& cfg = {});

cplx nonlocal_M(double r, double omega, double lambda_cutoff,
                const DetectorSpec& det, const QuadConfig& cfg = {});
cplx nonlocal_M_infinite(double r, double omega, const DetectorSpec& det,
                         const QuadConfig& cfg = {});
// Omega-free reduced integral; nonlocal_M = coupling^2 e^{-tau^2 omega^2} * this.
cplx nonlocal_M_scaled(double r, double lambda_cutoff, const DetectorSpec& det,
                       const QuadConfig& cfg = {});

MCEstimate monte_carlo_M_oracle(double r, double omega, double lambda_cutoff,
                                const DetectorSpec& det, long samples,
                                unsigned long long seed);

struct NegativityResult {
  double N2;
  double N;
};
NegativityResult negativity(double L_aa, double L_bb, const cplx& M);

HarvestPoint harvest_point(double r, double omega, double lambda_cutoff,
                           const DetectorSpec& det, const QuadConfig& cfg = {});

BoundaryResult harvesting_boundary(double omega, double lambda_cutoff,
                                   const DetectorSpec& det, const RScan& scan,
                                   const QuadConfig& cfg = {}, int threads = 1);

// Default scan window sized from the r* ~ 2 Omega tau^2 growth of the boundary.
RScan default_boundary_scan(double omega, const DetectorSpec& det);

double range_difference(double omega, double lambda_cutoff,
                        const DetectorSpec& det, const QuadConfig& cfg = {},
                        int threads = 1);

}  // namespace covband
