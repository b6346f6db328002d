// Compares the serial reference path against the OpenMP fan-out for the two
// sweep kernels that dominate wall time: the decay profile and a boundary
// scan.  Also asserts that both paths produce identical values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "covband/comm.hpp"
#include "covband/harvest.hpp"

using namespace covband;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

int main() {
  QuadConfig cfg;
  int hw = 1;
#ifdef _OPENMP
  hw = omp_get_max_threads();
#endif
  std::printf("hardware threads available: %d\n\n", hw);

  // decay profile r in [1,50], 160 points
  std::vector<double> rs;
  for (int i = 0; i < 160; ++i) rs.push_back(1.0 + 49.0 * i / 159.0);

  double t0 = now();
  auto serial = decay_profile(rs, 1.0, cfg, 1);
  const double ts = now() - t0;
  t0 = now();
  auto par = decay_profile(rs, 1.0, cfg, 0);
  const double tp = now() - t0;
  double worst = 0.0;
  for (std::size_t i = 0; i < rs.size(); ++i)
    worst = std::max(worst, std::abs(serial[i].value - par[i].value));
  std::printf("decay profile, 160 points:\n");
  std::printf("  serial   %7.2fs\n", ts);
  std::printf("  parallel %7.2fs  (speedup %.2fx)\n", tp, ts / tp);
  std::printf("  max |serial - parallel| = %.3g %s\n\n", worst,
              worst == 0.0 ? "(identical)" : "");

  // boundary scan at Omega=20, Lambda=10
  DetectorSpec det;
  det.sigma = 0.5;
  const RScan scan = default_boundary_scan(20.0, det);
  t0 = now();
  BoundaryResult b1 = harvesting_boundary(20.0, 10.0, det, scan, cfg, 1);
  const double bs = now() - t0;
  t0 = now();
  BoundaryResult b2 = harvesting_boundary(20.0, 10.0, det, scan, cfg, hw);
  const double bp = now() - t0;
  std::printf("boundary scan Omega=20, Lambda=10, %d scan points:\n", scan.n);
  std::printf("  serial   %7.2fs  r* = %.6f\n", bs, b1.r_star);
  std::printf("  parallel %7.2fs  r* = %.6f  (speedup %.2fx)\n", bp, b2.r_star,
              bs / bp);
  std::printf("  r* difference = %.3g %s\n", std::abs(b1.r_star - b2.r_star),
              b1.r_star == b2.r_star ? "(identical)" : "");
  return 0;
}
