// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "covband/comm.hpp"
#include "covband/field.hpp"
#include "covband/harvest.hpp"
#include "covband/runio.hpp"

using namespace covband;

namespace {

constexpr double kPi = 3.14159265358979323846;
int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

void report(int idx, const char* name, bool pass, const std::string& detail,
            double secs) {
  std::printf("%s criterion %2d [%s]: %s (%.1fs)\n", pass ? "PASS" : "FAIL",
              idx, name, detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

}  // namespace

static void c1_quadrature_golden() {
  Timer tm;
  QuadConfig cfg;
  int ok = 0, total = 0;
  auto check = [&](double got, double exact, double tol) {
    ++total;
    if (std::abs(got - exact) <= tol * std::max(1.0, std::abs(exact))) ++ok;
  };
  auto A = [&](Integrand f, double a, double b) {
    return integrate_adaptive(f, a, b, cfg).value.real();
  };
  // adaptive closed forms
  check(A([](double x) { return cplx(x * x, 0.0); }, 0, 1), 1.0 / 3, 1e-8);
  check(A([](double x) { return cplx(std::exp(x), 0.0); }, 0, 1), std::exp(1.0) - 1, 1e-8);
  check(A([](double x) { return cplx(std::sin(x), 0.0); }, 0, kPi), 2.0, 1e-8);
  check(A([](double x) { return cplx(1.0 / (1 + x * x), 0.0); }, -1, 1), kPi / 2, 1e-8);
  check(A([](double x) { return cplx(std::cos(30 * x), 0.0); }, 0, 2), std::sin(60.0) / 30, 1e-8);
  check(A([](double x) { return cplx(std::log(1 + x), 0.0); }, 0, 1), 2 * std::log(2.0) - 1, 1e-8);
  check(A([](double x) { return cplx(x * std::exp(-x * x), 0.0); }, 0, 3),
        0.5 * (1 - std::exp(-9.0)), 1e-8);
  check(A([](double x) { return cplx(std::cosh(x), 0.0); }, -1, 1), 2 * std::sinh(1.0), 1e-8);
  check(A([](double x) { return cplx(std::pow(x, 5.0), 0.0); }, 0, 2), 64.0 / 6, 1e-8);
  check(A([](double x) { return cplx(1.0 / (2 + std::cos(x)), 0.0); }, 0, 2 * kPi),
        2 * kPi / std::sqrt(3.0), 1e-8);
  // oscillatory semi-infinite
  {
    auto e = integrate_semi_infinite_oscillatory(
        [](double x) { return cplx(x == 0.0 ? 1.0 : std::sin(x) / x, 0.0); },
        [](long n) { return (double)n * kPi; }, 0.0, cfg);
    check(e.value.real(), kPi / 2, 1e-7);
  }
  {
    auto e = integrate_semi_infinite_oscillatory(
        [](double x) { return cplx(std::cos(x) / (1 + x * x), 0.0); },
        [](long n) { return kPi / 2 + (double)n * kPi; }, 0.0, cfg);
    check(e.value.real(), kPi / (2 * std::exp(1.0)), 1e-7);
  }
  {
    auto e = integrate_semi_infinite_oscillatory(
        [](double x) { return cplx(x == 0.0 ? 0.0 : std::sin(3 * x) / (x * (1 + x * x)), 0.0); },
        [](long n) { return (double)n * kPi / 3.0; }, 0.0, cfg);
    check(e.value.real(), kPi / 2 * (1 - std::exp(-3.0)), 1e-6);
  }
  {
    auto e = integrate_semi_infinite_oscillatory(
        [](double x) { return cplx(std::cos(2 * x) * std::exp(-x), 0.0); },
        [](long n) { return kPi / 4 + (double)n * kPi / 2.0; }, 0.0, cfg);
    check(e.value.real(), 1.0 / 5.0, 1e-7);
  }
  // principal value
  {
    auto e = integrate_principal_value([](double x) { return cplx(1.0 / x, 0.0); },
                                       PVSpec{0.0, -1.0, 1.0}, cfg);
    check(e.value.real(), 0.0, 1e-9);
  }
  {
    auto e = integrate_principal_value(
        [](double x) { return cplx(std::cos(x) / x, 0.0); }, PVSpec{0.0, -2.0, 2.0}, cfg);
    check(e.value.real(), 0.0, 1e-9);
  }
  {
    auto e = integrate_principal_value(
        [](double x) { return cplx(std::exp(x) / (x - 1.0), 0.0); },
        PVSpec{1.0, 0.0, 3.0}, cfg);
    // e * (Ei(2) - Ei(-1)) in closed form
    check(e.value.real(), 14.063352586170634, 1e-8);
  }
  {
    // x^2/(x-2) = x + 2 + 4/(x-2); the pole part cancels by symmetry
    auto e = integrate_principal_value(
        [](double x) { return cplx(x * x / (x - 2.0), 0.0); }, PVSpec{2.0, 0.0, 4.0}, cfg);
    check(e.value.real(), 16.0, 1e-8);
  }
  // sqrt endpoints
  {
    auto e = integrate_sqrt_endpoint([](double x) { return cplx(1.0 / std::sqrt(x), 0.0); },
                                     0.0, 1.0, cfg);
    check(e.value.real(), 2.0, 1e-8);
  }
  {
    auto e = integrate_sqrt_endpoint(
        [](double x) { return cplx(x / std::sqrt(x), 0.0); }, 0.0, 4.0, cfg);
    check(e.value.real(), 16.0 / 3.0, 1e-8);
  }
  report(1, "quadrature golden suite", ok == total && tm.s() < 10.0,
         std::to_string(ok) + "/" + std::to_string(total) + " within tolerance",
         tm.s());
}

static void c2_representation_equivalence() {
  Timer tm;
  QuadConfig cfg;
  double worst = 0.0;
  int pts = 0;
  for (double r : {1.0, 2.0, 4.0, 8.0})
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
      if (std::abs(r - t) < 1e-9) continue;  // lightcone exclusion zone
      const double a = acausal_term(r, t, 1.0, cfg).value;
      const double b = acausal_term_pv_oracle(r, t, 1.0, cfg).value;
      worst = std::max(worst, std::abs(a - b) / std::abs(a));
      ++pts;
    }
  report(2, "I_Lambda representation equivalence", worst <= 1e-5 && tm.s() < 120.0,
         std::to_string(pts) + " grid points, max rel diff " + num(worst), tm.s());
}

static void c3_cutoff_removal() {
  Timer tm;
  QuadConfig cfg;
  const double i_lo = std::abs(acausal_term(2.0, 0.0, 0.5, cfg).value);
  const double i_hi = std::abs(acausal_term(2.0, 0.0, 50.0, cfg).value);
  DetectorSpec det;
  det.sigma = 0.5;
  const double r = 6.0 * det.sigma, om = 2.0;
  const cplx m50 = nonlocal_M(r, om, 50.0, det, cfg);
  const cplx minf = nonlocal_M_infinite(r, om, det, cfg);
  const double mrel = std::abs(m50 - minf) / std::abs(minf);
  const bool pass = (i_hi <= 1e-3 * i_lo) && (mrel <= 1e-3) && tm.s() < 60.0;
  report(3, "cutoff removal", pass,
         "|I|(50)/|I|(0.5)=" + num(i_hi / i_lo) + ", M rel diff " + num(mrel),
         tm.s());
}

static void c4_kernel_decomposition() {
  Timer tm;
  QuadConfig cfg;
  double worst = 0.0;
  for (double L : {0.2, 1.0, 5.0})
    for (double t : {-2.0, -1.0, 0.5, 1.5, 3.0})
      for (double r : {0.8, 1.6, 2.6, 4.0, 6.0}) {
        const cplx kp = bandlimited_timeordered_kernel({t, r}, BandRegion{L}, cfg).value;
        const cplx km = bandlimited_timeordered_kernel({-t, r}, BandRegion{L}, cfg).value;
        const cplx d = wightman_massless({t, r});
        worst = std::max(worst, std::abs(kp + std::conj(km) - d) / std::abs(d));
      }
  report(4, "K decomposition identity", worst <= 1e-6 && tm.s() < 120.0,
         "5x5 grid x 3 cutoffs, max rel residual " + num(worst), tm.s());
}

static void c5_decay_figure() {
  Timer tm;
  QuadConfig cfg;
  std::vector<double> rs;
  for (int i = 0; i < 160; ++i) rs.push_back(1.0 + 49.0 * i / 159.0);
  auto prof = decay_profile(rs, 1.0, cfg, 0);
  std::vector<double> y;
  double peak = 0.0;
  for (auto& s : prof) {
    y.push_back(s.value);
    peak = std::max(peak, std::abs(s.value));
  }
  const double spacing = mean_zero_crossing_spacing(rs, y);
  // two sign changes per oscillation wavelength 2pi/Lambda
  const double target = kPi / 1.0;
  const bool pass = peak < 10.0 && spacing >= 0.5 * target &&
                    spacing <= 2.0 * target && tm.s() < 60.0;
  report(5, "decay profile (fig 4)", pass,
         "peak " + num(peak) + ", crossing spacing " + num(spacing) +
             " vs half-wavelength pi/Lambda " + num(target),
         tm.s());
}

static void c6_boundary_monotone() {
  Timer tm;
  QuadConfig cfg;
  DetectorSpec det;
  det.sigma = 0.5;
  bool monotone = true;
  double prev = 0.0;
  std::string vals;
  for (double om : {10.0, 15.0, 20.0, 25.0, 30.0}) {
    BoundaryResult b =
        harvesting_boundary(om, 10.0, det, default_boundary_scan(om, det), cfg, 0);
    if (b.r_star < prev * (1.0 - 1e-3)) monotone = false;
    prev = b.r_star;
    vals += num(b.r_star) + " ";
  }
  report(6, "boundary r*(Omega) nondecreasing (fig 1)", monotone && tm.s() < 600.0,
         "r* = " + vals, tm.s());
}

static void c7_range_difference() {
  Timer tm;
  QuadConfig cfg;
  DetectorSpec det;
  det.sigma = 0.5;
  bool nonneg = true;
  double max01 = -1e300, max02 = -1e300;
  for (double om : {10.0, 15.0, 20.0, 25.0, 30.0}) {
    const RScan scan = default_boundary_scan(om, det);
    const double rinf =
        harvesting_boundary(om, kLambdaInf, det, scan, cfg, 0).r_star;
    const double d01 =
        harvesting_boundary(om, 0.1, det, scan, cfg, 0).r_star - rinf;
    const double d02 =
        harvesting_boundary(om, 0.2, det, scan, cfg, 0).r_star - rinf;
    if (d01 < -1e-3 * rinf || d02 < -1e-3 * rinf) nonneg = false;
    max01 = std::max(max01, d01);
    max02 = std::max(max02, d02);
  }
  const bool pass = nonneg && max02 < max01 && tm.s() < 900.0;
  report(7, "range difference (fig 2)", pass,
         "max dr: Lambda=0.1 -> " + num(max01) + ", Lambda=0.2 -> " + num(max02),
         tm.s());
}

static void c8_negativity_curves() {
  Timer tm;
  QuadConfig cfg;
  DetectorSpec det;
  det.sigma = 0.5;
  const double om = 40.0;
  // harvesting range from the shared scan at the stronger cutoff
  const RScan scan{2.0, 110.0, 270};
  const double rstar =
      std::min(harvesting_boundary(om, 0.1, det, scan, cfg, 0).r_star,
               harvesting_boundary(om, 10.0, det, scan, cfg, 0).r_star);
  // harvesting range is [0, r*]; compare over its inner 80%
  const double a = 0.1 * rstar;
  const double b = 0.9 * rstar;
  double peak = 0.0, worst = 0.0;
  std::vector<double> n1, n2;
  for (int i = 0; i < 36; ++i) {
    const double r = a + (b - a) * i / 35.0;
    n1.push_back(harvest_point(r, om, 0.1, det, cfg).N_scaled);
    n2.push_back(harvest_point(r, om, 10.0, det, cfg).N_scaled);
    peak = std::max(peak, std::max(n1.back(), n2.back()));
  }
  for (std::size_t i = 0; i < n1.size(); ++i)
    worst = std::max(worst, std::abs(n1[i] - n2[i]));
  const double rel = worst / peak;
  report(8, "negativity curves vs cutoff (fig 3)", rel <= 0.05 && tm.s() < 600.0,
         "max curve diff " + num(rel) + " of peak over inner 80%", tm.s());
}

static void c9_oracle_agreement() {
  Timer tm;
  QuadConfig cfg;
  DetectorSpec det;
  det.omega = 2.0;
  det.sigma = 0.5;
  const double r = 6.0 * det.sigma;
  const MCEstimate mc = monte_carlo_M_oracle(r, det.omega, 1.0, det, 1000000, 2024);
  const cplx m = nonlocal_M(r, det.omega, 1.0, det, cfg);
  const double dev_m = std::abs(m - mc.value) / mc.std_error;

  // smeared acausal vs direct Monte Carlo over both smearings and switchings
  const double d = 3.0, L = 1.0;
  auto sig = smeared_signal(det, det, d, L, cfg);
  const double tau = det.tau, sigma = det.sigma;
  const cplx Cv = 2.0 * tau * std::sqrt(kPi) *
                  std::exp(-tau * tau * det.omega * det.omega);
  const cplx pref = cplx(0.0, 1.0) * Cv / (4.0 * kPi * tau * tau);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gs(0.0, tau), gx(0.0, sigma);
  const long n = 400000;
  double acc = 0.0, acc2 = 0.0;
  for (long i = 0; i < n; ++i) {
    double u, rr;
    do {
      u = gs(rng) - gs(rng);
      const double dx = gx(rng) - gx(rng);
      const double dy = gx(rng) - gx(rng);
      const double dz = d + gx(rng) - gx(rng);
      rr = std::sqrt(dx * dx + dy * dy + dz * dz);
    } while (std::abs(rr - std::abs(u)) < 1e-4 * std::max(rr, 1.0));
    const double x = acausal_term_closed(rr, u, L) / rr;
    acc += x;
    acc2 += x * x;
  }
  const double mean = acc / n;
  const double se = std::sqrt(std::max(0.0, acc2 / n - mean * mean) / n);
  const double window = std::sqrt(4.0 * kPi * tau * tau);
  const cplx mc_ac = -pref * window * mean;
  const double se_ac = std::abs(pref) * window * se;
  const double dev_a = std::abs(sig.acausal - mc_ac) / se_ac;

  const bool pass = dev_m <= 3.0 && dev_a <= 3.0 && tm.s() < 300.0;
  report(9, "Monte Carlo oracle agreement", pass,
         "M dev " + num(dev_m) + " sigma, smeared acausal dev " + num(dev_a) +
             " sigma",
         tm.s());
}

static void c10_lambda_independence() {
  Timer tm;
  QuadConfig cfg;
  DetectorSpec det;
  det.sigma = 0.5;
  HarvestPoint ref = harvest_point(3.0, 2.0, 0.1, det, cfg);
  bool same = true;
  for (double L : {1.0, 10.0, kLambdaInf}) {
    HarvestPoint p = harvest_point(3.0, 2.0, L, det, cfg);
    if (p.L != ref.L || p.L_scaled != ref.L_scaled) same = false;
  }
  report(10, "local noise Lambda independence", same,
         same ? "bitwise identical for Lambda in {0.1,1,10,inf}" : "mismatch",
         tm.s());
}

static void c11_cli_determinism() {
  Timer tm;
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.command = "acausal";
  cfg.cutoff = 1.0;
  cfg.r_grid = GridSpec{1.2, 4.0, 8};
  cfg.threads = 1;
  const std::string c1 = format_csv(run(cfg));
  const std::string c2 = format_csv(run(cfg));
  cfg.threads = 0;  // auto
  const std::string c3 = format_csv(run(cfg));
  const fs::path cache =
      fs::temp_directory_path() / ("covband_accept_" + std::to_string(::getpid()));
  cfg.cache_dir = cache.string();
  cfg.threads = 1;
  const std::string cold = format_csv(run(cfg));
  const std::string warm = format_csv(run(cfg));
  fs::remove_all(cache);
  const bool pass =
      c1 == c2 && c1 == c3 && cold == c1 && warm == c1 && tm.s() < 60.0;
  report(11, "CLI determinism and cache soundness", pass,
         pass ? "byte-identical across repeats, thread counts and cache hits"
              : "byte mismatch",
         tm.s());
}

int main() {
  c1_quadrature_golden();
  c2_representation_equivalence();
  c3_cutoff_removal();
  c4_kernel_decomposition();
  c5_decay_figure();
  c6_boundary_monotone();
  c7_range_difference();
  c8_negativity_curves();
  c9_oracle_agreement();
  c10_lambda_independence();
  c11_cli_determinism();
  if (failures) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all 11 criteria passed\n");
  return 0;
}
