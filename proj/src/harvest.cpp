#include "covband/harvest.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gsl/gsl_sf_expint.h>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covband {

namespace {

constexpr double kPi = 3.14159265358979323846;

// P.V. integral of the shifted Gaussian e^{-tau^2 (nu-k)^2} / nu over the
// admissible nu set (band intervals, or the full line for Lambda=inf),
// clipped to the Gaussian support.
double gaussian_pv(double k, double L, double tau, const QuadConfig& cfg,
                   long& evals) {
  const double width = 9.0 / tau;
  auto f = [&](double nu) {
    const double d = nu - k;
    return cplx(std::exp(-tau * tau * d * d) / nu, 0.0);
  };
  auto piece = [&](double lo, double hi) -> double {
    // clip to the Gaussian support, keeping the pole strictly interior when
    // it is inside this interval
    double a = std::max(lo, k - width);
    double b = std::min(hi, k + width);
    if (lo < 0.0 && 0.0 < hi) {
      a = std::min(a, -0.5 * std::min(1.0, -lo));
      b = std::max(b, 0.5 * std::min(1.0, hi));
      QuadEstimate e = integrate_principal_value(f, PVSpec{0.0, a, b}, cfg);
      evals += e.evaluations;
      return e.value.real();
    }
    if (a >= b) return 0.0;
    QuadEstimate e = integrate_adaptive(f, a, b, cfg);
    evals += e.evaluations;
    return e.value.real();
  };
  double tot = 0.0;
  if (std::isinf(L)) {
    tot += piece(k - 2.0 * width - 1.0, k + 2.0 * width + 1.0);
  } else {
    for (const auto& [lo, hi] : nu_band_intervals(k, BandRegion{L}))
      tot += piece(lo, hi);
  }
  return tot;
}

// sum of adaptive blocks of width pi/r over [0, kmax] (finite oscillatory)
QuadEstimate blocked_finite(const Integrand& f, double kmax, double r,
                            const QuadConfig& cfg) {
  QuadEstimate acc;
  const double dk = kPi / std::max(r, 1e-3);
  double k0 = 0.0;
  while (k0 < kmax) {
    const double k1 = std::min(k0 + dk, kmax);
    QuadEstimate e = integrate_adaptive(f, k0, k1, cfg);
    acc.value += e.value;
    acc.abs_error += e.abs_error;
    acc.evaluations += e.evaluations;
    k0 = k1;
  }
  acc.converged = true;
  return acc;
}

// analytic nu-part of the pre-reduction kernel for the MC oracle:
// P.V. int e^{i nu u}/nu dnu over the band (Si/Ci closed form) + i pi
cplx band_exp_pv_analytic(double k, double u, double L) {
  if (std::isinf(L))
    return cplx(0.0, kPi * (1.0 + ((u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0))));
  const double au = std::abs(u);
  const double sg = (u > 0.0) ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  cplx tot{0.0, kPi};
  for (const auto& [a, b] : nu_band_intervals(k, BandRegion{L})) {
    if (au == 0.0) {
      tot += (a < 0.0 && 0.0 < b) ? std::log(b / (-a)) : std::log(b / a);
      continue;
    }
    if (a < 0.0 && 0.0 < b) {
      tot += cplx(gsl_sf_Ci(au * b) - gsl_sf_Ci(au * (-a)),
                  sg * (gsl_sf_Si(au * b) + gsl_sf_Si(au * (-a))));
    } else {
      tot += cplx(gsl_sf_Ci(au * b) - gsl_sf_Ci(au * a),
                  sg * (gsl_sf_Si(au * b) - gsl_sf_Si(au * a)));
    }
  }
  return tot;
}

}  // namespace

double local_noise_scaled(const DetectorSpec& det, const QuadConfig& cfg) {
  const double a = det.sigma * det.sigma + det.tau * det.tau;
  const double b = 2.0 * det.tau * det.tau * det.omega;
  auto f = [&](double k) { return cplx(k * std::exp(-a * k * k - b * k), 0.0); };
  const double kmax = (std::sqrt(42.0 + b) + b) / a + 2.0;  // integrand < 1e-18 past here
  QuadEstimate e = integrate_adaptive(f, 0.0, std::min(kmax, 7.0 / std::sqrt(a) + 2.0), cfg);
  return e.value.real() / (4.0 * kPi * kPi);
}

double local_noise(const DetectorSpec& det, const QuadConfig& cfg) {
  const double to2 = det.tau * det.tau * det.omega * det.omega;
  return det.coupling * det.coupling * std::exp(-to2) *
         local_noise_scaled(det, cfg);
}

cplx nonlocal_M_scaled(double r, double L, const DetectorSpec& det,
                       const QuadConfig& cfg) {
  if (!(r > 0.0)) throw QuadError("nonlocal_M: r <= 0");
  const double sigma = det.sigma;
  const double tau = det.tau;
  QuadConfig icfg = cfg;
  icfg.rel_tol = std::max(cfg.rel_tol, 1e-8);
  long evals = 0;
  auto fP = [&](double k) {
    return cplx(std::sin(k * r) * std::exp(-sigma * sigma * k * k) *
                    gaussian_pv(k, L, tau, icfg, evals),
                0.0);
  };
  auto fG = [&](double k) {
    return cplx(std::sin(k * r) *
                    std::exp(-(sigma * sigma + tau * tau) * k * k),
                0.0);
  };
  const double kmaxP = 6.5 / sigma;
  const double kmaxG = 6.5 / std::sqrt(sigma * sigma + tau * tau);
  const double P = blocked_finite(fP, kmaxP, r, cfg).value.real();
  const double G = blocked_finite(fG, kmaxG, r, cfg).value.real();
  return cplx(-kPi * G, P) / (4.0 * kPi * kPi * kPi * r);
}

cplx nonlocal_M(double r, double omega, double L, const DetectorSpec& det,
                const QuadConfig& cfg) {
  const double to2 = det.tau * det.tau * omega * omega;
  return det.coupling * det.coupling * std::exp(-to2) *
         nonlocal_M_scaled(r, L, det, cfg);
}

cplx nonlocal_M_infinite(double r, double omega, const DetectorSpec& det,
                         const QuadConfig& cfg) {
  return nonlocal_M(r, omega, kLambdaInf, det, cfg);
}

MCEstimate monte_carlo_M_oracle(double r, double omega, double L,
                                const DetectorSpec& det, long samples,
                                unsigned long long seed) {
  if (samples < 100000) throw QuadError("monte_carlo_M_oracle: samples too low");
  const double tau = det.tau;
  const double sigma = det.sigma;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, tau);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Gaussian switchings importance-sampled with the e^{i Omega(s+s')} tilt
  // absorbed analytically (contour shift s -> s + i Omega tau^2 leaves
  // u = s - s' real and extracts the exact e^{-tau^2 Omega^2} prefactor);
  // k drawn from the Rayleigh density 2 sigma^2 k e^{-sigma^2 k^2}.
  cplx sum{0.0, 0.0};
  cplx sum2{0.0, 0.0};  // componentwise second moments
  for (long i = 0; i < samples; ++i) {
    const double s = gauss(rng);
    const double sp = gauss(rng);
    const double k = std::sqrt(-std::log1p(-unif(rng))) / sigma;
    const double u = s - sp;
    const cplx x = std::sin(k * r) / (2.0 * sigma * sigma * k) *
                   std::exp(cplx(0.0, -k * u)) * band_exp_pv_analytic(k, u, L);
    sum += x;
    sum2 += cplx(x.real() * x.real(), x.imag() * x.imag());
  }
  const cplx mean = sum / (double)samples;
  const double vr =
      std::max(0.0, sum2.real() / samples - mean.real() * mean.real());
  const double vi =
      std::max(0.0, sum2.imag() / samples - mean.imag() * mean.imag());
  const cplx pref = -2.0 * det.coupling * det.coupling *
                    std::exp(-tau * tau * omega * omega) /
                    (cplx(0.0, 2.0 * kPi) * 4.0 * kPi * kPi * r);
  MCEstimate out;
  out.value = pref * mean;
  out.std_error = std::abs(pref) * std::sqrt((vr + vi) / (double)samples);
  out.samples = samples;
  return out;
}

NegativityResult negativity(double L_aa, double L_bb, const cplx& M) {
  if (L_aa < 0.0 || L_bb < 0.0)
    throw QuadError("negativity: local noise must be nonnegative");
  const double dL = L_aa - L_bb;
  const double N2 =
      -0.5 * (L_aa + L_bb - std::sqrt(dL * dL + 4.0 * std::norm(M)));
  return {N2, std::max(0.0, N2)};
}

HarvestPoint harvest_point(double r, double omega, double L,
                           const DetectorSpec& det, const QuadConfig& cfg) {
  DetectorSpec d = det;
  d.omega = omega;
  HarvestPoint p;
  p.r = r;
  p.omega = omega;
  p.lambda_cutoff = L;
  p.L_scaled = local_noise_scaled(d, cfg);
  p.M_scaled = nonlocal_M_scaled(r, L, d, cfg);
  p.N2_scaled = std::abs(p.M_scaled) - p.L_scaled;
  p.N_scaled = std::max(0.0, p.N2_scaled);
  const double pref =
      d.coupling * d.coupling * std::exp(-d.tau * d.tau * omega * omega);
  p.L = pref * p.L_scaled;
  p.M = pref * p.M_scaled;
  p.N2 = pref * p.N2_scaled;
  p.N = std::max(0.0, p.N2);
  return p;
}

RScan default_boundary_scan(double omega, const DetectorSpec& det) {
  const double rmin = 4.0 * det.sigma;
  const double rmax =
      std::max(2.6 * omega * det.tau * det.tau + 12.0, rmin + 10.0);
  const int n = std::max(48, (int)std::ceil((rmax - rmin) / 0.4));
  return {rmin, rmax, n};
}

BoundaryResult harvesting_boundary(double omega, double L,
                                   const DetectorSpec& det, const RScan& scan,
                                   const QuadConfig& cfg, int threads) {
  if (scan.n < 8) throw QuadError("harvesting_boundary: scan needs n >= 8");
  if (scan.r_min < 4.0 * det.sigma - 1e-12)
    throw QuadError("harvesting_boundary: r_min below 4 sigma");
  DetectorSpec d = det;
  d.omega = omega;
  const double Lt = local_noise_scaled(d, cfg);
  auto N2t = [&](double r) {
    return std::abs(nonlocal_M_scaled(r, L, d, cfg)) - Lt;
  };
  int nt = threads;
#ifdef _OPENMP
  if (nt <= 0) nt = omp_get_max_threads();
#else
  nt = 1;
#endif
  std::exception_ptr first_error;
  std::vector<double> rs(scan.n), vals(scan.n);
  for (int i = 0; i < scan.n; ++i)
    rs[i] = scan.r_min +
            (scan.r_max - scan.r_min) * (double)i / (double)(scan.n - 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(1, nt))
#endif
  for (int i = 0; i < scan.n; ++i) {
    try {
      vals[i] = N2t(rs[i]);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  int idx = -1;  // outermost sign change, ties toward larger r
  for (int i = 0; i + 1 < scan.n; ++i)
    if (vals[i] > 0.0 && vals[i + 1] <= 0.0) idx = i;
  if (idx < 0) {
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    throw BoundaryNotFound("harvesting_boundary: no sign change in scan", *mn,
                           *mx);
  }
  double a = rs[idx], b = rs[idx + 1];
  double fa = vals[idx];
  int iters = 0;
  while (b - a > 1e-4 * 0.5 * (a + b) && iters < 80) {
    const double m = 0.5 * (a + b);
    const double fm = N2t(m);
    if (fa > 0.0 && fm <= 0.0) {
      b = m;
    } else {
      a = m;
      fa = fm;
    }
    ++iters;
  }
  BoundaryResult out;
  out.omega = omega;
  out.lambda_cutoff = L;
  out.r_star = 0.5 * (a + b);
  out.r_lo = a;
  out.r_hi = b;
  out.iterations = iters;
  out.scan_points = scan.n;
  return out;
}

double range_difference(double omega, double L, const DetectorSpec& det,
                        const QuadConfig& cfg, int threads) {
  const RScan scan = default_boundary_scan(omega, det);
  const BoundaryResult cut =
      harvesting_boundary(omega, L, det, scan, cfg, threads);
  const BoundaryResult ref =
      harvesting_boundary(omega, kLambdaInf, det, scan, cfg, threads);
  return cut.r_star - ref.r_star;
}

}  // namespace covband
