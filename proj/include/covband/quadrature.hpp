#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace covband {

using cplx = std::complex<double>;
using Integrand = std::function<cplx(double)>;

struct QuadConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 4000;
  int accel_terms = 12;  // partial sums kept for tail extrapolation
};

struct QuadEstimate {
  cplx value{0.0, 0.0};
  double abs_error = 0.0;
  long evaluations = 0;
  bool converged = false;
};

// Simple pole at `singularity`, strictly interior to [a,b].
struct PVSpec {
  double singularity;
  double a;
  double b;
};

class QuadError : public std::runtime_error {
 public:
  explicit QuadError(const std::string& what) : std::runtime_error(what) {}
};

// Adaptive Gauss-Kronrod 7-15 with worst-panel bisection.
QuadEstimate integrate_adaptive(const Integrand& f, double a, double b,
                                const QuadConfig& cfg = {});

// Sums per-lobe integrals between consecutive phase zeros starting at `a`
// (zeros(n) gives the n-th zero >= a, strictly increasing, unbounded) and
// accelerates the partial-sum sequence with the Wynn epsilon algorithm over a
// sliding window of cfg.accel_terms sums.
QuadEstimate integrate_semi_infinite_oscillatory(
    const Integrand& amplitude, const std::function<double(long)>& zeros,
    double a, const QuadConfig& cfg = {});

// P.V. integral of f with a simple pole: symmetric pairing over the largest
// interval centred on the pole plus ordinary quadrature on the remainder.
QuadEstimate integrate_principal_value(const Integrand& f, const PVSpec& pv,
                                       const QuadConfig& cfg = {});

// Integrand with a 1/sqrt(x-a) endpoint singularity: substitution x = a + u^2.
QuadEstimate integrate_sqrt_endpoint(const Integrand& f, double a, double b,
                                     const QuadConfig& cfg = {});

// Wynn epsilon acceleration of a partial-sum sequence. Returns the deepest
// stable even-column entry and the difference of the last two entries in that
// column as an error estimate.
std::pair<cplx, double> wynn_epsilon(const std::vector<cplx>& partial_sums);

}  // namespace covband
