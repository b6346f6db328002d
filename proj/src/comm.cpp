#include "covband/comm.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace covband {

namespace {

constexpr double kPi = 3.14159265358979323846;

double exclusion_width(double r) { return 1e-3 * std::max(r, 1.0); }

// S(r,t) = J1 - J2: the Lambda-dependent difference of the two omega integrals
// of the signaling amplitude, with the 2 cos(omega r)/(t^2-r^2) prefactor
// stripped. I_Lambda = 4 r S / (pi^2 (t^2 - r^2)).
QuadEstimate S_lambda_form(double r, double t_in, double L,
                           const QuadConfig& cfg) {
  const double t = std::abs(t_in);
  auto ap = [L](double w) { return std::sqrt(w * w + L * L); };
  auto am = [L](double w) { return std::sqrt(w * w - L * L); };
  auto f2 = [&](double w) {
    return cplx(std::cos(w * r) * std::cos(ap(w) * t) / ap(w), 0.0);
  };
  auto f1 = [&](double w) {
    return cplx(std::cos(w * r) * std::cos(am(w) * t) / am(w), 0.0);
  };

  QuadEstimate acc;
  auto add = [&acc](const QuadEstimate& e, double sign) {
    acc.value += sign * e.value;
    acc.abs_error += e.abs_error;
    acc.evaluations += e.evaluations;
  };

  add(integrate_adaptive(f2, 0.0, L, cfg), -1.0);  // J2 head below Lambda
  const double W = L + std::max({6.0 / r, 4.0 / std::max(L, 1e-3), 10.0});
  add(integrate_sqrt_endpoint(f1, L, W, cfg), +1.0);
  add(integrate_adaptive(f2, L, W, cfg), -1.0);

  // combined tail, split into the fast (freq r+t) and slow (freq |r-t|)
  // phase pairs; each pair decays and is lobe-summed at its own spacing
  auto fast = [&](double w) {
    return cplx(0.5 * (std::cos(w * r + am(w) * t) / am(w) -
                       std::cos(w * r + ap(w) * t) / ap(w)),
                0.0);
  };
  auto slow = [&](double w) {
    return cplx(0.5 * (std::cos(w * r - am(w) * t) / am(w) -
                       std::cos(w * r - ap(w) * t) / ap(w)),
                0.0);
  };
  {
    const double dk = kPi / (r + t);
    QuadEstimate e = integrate_semi_infinite_oscillatory(
        fast, [W, dk](long n) { return W + (double)n * dk; }, W, cfg);
    add(e, +1.0);
    acc.converged = e.converged;
  }
  const double f = std::abs(r - t);
  double start = W;
  if (f > 0.0 && f * W < 2.0) {
    const double stop = 2.0 / f;
    while (start < stop) {
      const double next = std::min(2.0 * start, stop);
      add(integrate_adaptive(slow, start, next, cfg), +1.0);
      start = next;
    }
  }
  if (f > 0.0) {
    const double dk = kPi / f;
    const double base = start;
    QuadEstimate e = integrate_semi_infinite_oscillatory(
        slow, [base, dk](long n) { return base + (double)n * dk; }, base, cfg);
    add(e, +1.0);
    acc.converged = acc.converged && e.converged;
  } else {
    // on-cone slow pair is absolutely convergent (1/w^3 decay)
    double w0 = start;
    for (;;) {
      QuadEstimate e = integrate_adaptive(slow, w0, 2.0 * w0, cfg);
      add(e, +1.0);
      w0 *= 2.0;
      if (std::abs(e.value) < cfg.abs_tol || w0 > 1e12) break;
    }
  }
  return acc;
}

}  // namespace

double acausal_S_closed(double r, double t, double L) {
  const double rho2 = r * r - t * t;
  if (rho2 > 0.0) {
    const double z = L * std::sqrt(rho2);
    return -0.5 * kPi * std::cyl_neumann(0.0, z) - std::cyl_bessel_k(0.0, z);
  }
  const double z = L * std::sqrt(-rho2);
  return std::cyl_bessel_k(0.0, z) + 0.5 * kPi * std::cyl_neumann(0.0, z);
}

double acausal_term_closed(double r, double t, double L) {
  if (std::isinf(L)) return 0.0;  // the uncut theory is exactly causal
  return 4.0 * r * acausal_S_closed(r, t, L) / (kPi * kPi * (t * t - r * r));
}

ChannelSample acausal_term(double r, double t, double L, const QuadConfig& cfg) {
  if (!(r > 0.0)) throw QuadError("acausal_term: r <= 0");
  if (std::abs(std::abs(t) - r) <= exclusion_width(r))
    throw SingularPointError("acausal_term: on-cone input");
  if (std::isinf(L)) {
    ChannelSample out;
    out.r = r;
    out.t = t;
    out.lambda_cutoff = L;
    out.method = "uncut_limit";
    out.value = 0.0;
    out.estimate = {cplx{0.0, 0.0}, 0.0, 0, true};
    return out;
  }
  QuadEstimate S = S_lambda_form(r, t, L, cfg);
  ChannelSample out;
  out.r = r;
  out.t = t;
  out.lambda_cutoff = L;
  out.method = "lambda_form";
  const cplx I = 4.0 * r * S.value / (kPi * kPi * (t * t - r * r));
  if (std::abs(I.imag()) > 1e-8 * std::max(std::abs(I.real()), 1e-300))
    throw QuadError("acausal_term: imaginary residual exceeds reality bound");
  out.value = I.real();
  S.value = I;
  S.abs_error *= 4.0 * r / (kPi * kPi * std::abs(t * t - r * r));
  out.estimate = S;
  return out;
}

ChannelSample acausal_term_pv_oracle(double r, double t_in, double L,
                                     const QuadConfig& cfg) {
  if (!(r > 0.0)) throw QuadError("acausal_term_pv_oracle: r <= 0");
  if (std::abs(std::abs(t_in) - r) <= exclusion_width(r))
    throw SingularPointError("acausal_term_pv_oracle: on-cone input");
  const double t = std::abs(t_in);
  const BandRegion band{L};
  QuadEstimate acc;

  auto g = [&](double w) -> cplx {
    cplx tot{0.0, 0.0};
    auto f = [&](double nu) {
      return cplx(std::cos((w - nu) * t) / nu, 0.0);
    };
    for (const auto& [lo, hi] : nu_band_intervals(w, band)) {
      QuadEstimate e = (lo < 0.0 && 0.0 < hi)
                           ? integrate_principal_value(f, PVSpec{0.0, lo, hi}, cfg)
                           : integrate_adaptive(f, lo, hi, cfg);
      tot += e.value;
      acc.evaluations += e.evaluations;
    }
    return tot;
  };
  auto outer = [&](double w) { return std::sin(w * r) * g(w); };
  const double dw = kPi / r;
  QuadConfig ocfg = cfg;  // slowly decaying lobes: widen the accel window
  ocfg.accel_terms = std::max(cfg.accel_terms, 48);
  QuadEstimate e = integrate_semi_infinite_oscillatory(
      outer, [dw](long n) { return (double)n * dw; }, 0.0, ocfg);
  acc.abs_error = e.abs_error * 2.0 / (kPi * kPi);
  acc.evaluations += e.evaluations;
  acc.converged = e.converged;
  const cplx I = (2.0 / (kPi * kPi)) * e.value;
  if (std::abs(I.imag()) > std::max(1e-10, 1e-8 * std::abs(I.real())))
    throw QuadError("acausal_term_pv_oracle: imaginary residual too large");
  ChannelSample out;
  out.r = r;
  out.t = t_in;
  out.lambda_cutoff = L;
  out.method = "pv_oracle";
  out.value = I.real();
  acc.value = I;
  out.estimate = acc;
  return out;
}

std::vector<ChannelSample> decay_profile(const std::vector<double>& r_grid,
                                         double L, const QuadConfig& cfg,
                                         int threads) {
  std::vector<ChannelSample> out(r_grid.size());
  int nt = threads;
#ifdef _OPENMP
  if (nt <= 0) nt = omp_get_max_threads();
#else
  nt = 1;
#endif
  std::exception_ptr first_error;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(1, nt))
#endif
  for (long i = 0; i < (long)r_grid.size(); ++i) {
    try {
      ChannelSample s = acausal_term(r_grid[i], 0.0, L, cfg);
      s.value *= r_grid[i];  // report r * I
      out[i] = s;
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

double inter_gaussian_distance_density(double r, double d, double sigma) {
  const double s2 = sigma * sigma;
  const double a = (r - d) * (r - d) / (4.0 * s2);
  const double b = (r + d) * (r + d) / (4.0 * s2);
  return r / (2.0 * d * std::sqrt(kPi * s2)) * (std::exp(-a) - std::exp(-b));
}

SignalAmplitude smeared_signal(const DetectorSpec& detA, const DetectorSpec& detB,
                               double d, double L, const QuadConfig& cfg) {
  if (!(d > 0.0)) throw QuadError("smeared_signal: d <= 0");
  if (detA.tau != detB.tau)
    throw QuadError("smeared_signal: detectors must share tau");
  if (detA.sigma != detB.sigma)
    throw QuadError("smeared_signal: detectors must share sigma");
  const double tau = detA.tau;
  const double sigma = detA.sigma;
  const double om_sum = detA.omega + detB.omega;
  const double om_diff = detA.omega - detB.omega;

  SignalAmplitude out;
  out.overlap_warning = (d <= 4.0 * sigma);

  const double Cv = 2.0 * tau * std::sqrt(kPi) *
                    std::exp(-0.25 * tau * tau * om_sum * om_sum);
  const cplx pref = cplx(0.0, detA.coupling * detB.coupling) * Cv /
                    (4.0 * kPi * tau * tau);
  const double U = 12.0 * tau;
  auto u_weight = [&](double u) {
    return std::exp(-0.25 * u * u / (tau * tau)) *
           std::exp(cplx(0.0, 0.5 * om_diff * u));
  };

  // causal part: the delta terms collapse r to |u|
  auto causal_f = [&](double u) -> cplx {
    const double au = std::abs(u);
    const double pr = (au < 1e-12)
                          ? inter_gaussian_distance_density(1e-12, d, sigma) / 1e-12
                          : inter_gaussian_distance_density(au, d, sigma) / au;
    return u_weight(u) * pr;
  };
  QuadEstimate ce = integrate_adaptive(causal_f, -U, U, cfg);
  out.causal = pref * ce.value;

  // acausal part: 2D (u, r) quadrature against I_Lambda/r, which is
  // log-singular on the cone r=|u| (integrable); the inner integral splits
  // there
  const double rlo = std::max(1e-6, d - 13.0 * sigma);
  const double rhi = d + 13.0 * sigma;
  QuadConfig icfg = cfg;
  icfg.rel_tol = std::max(cfg.rel_tol, 1e-7);
  auto Q = [&](double u) -> double {
    auto f = [&](double rr) {
      return cplx(inter_gaussian_distance_density(rr, d, sigma) *
                      acausal_term_closed(rr, u, L) / rr,
                  0.0);
    };
    const double au = std::abs(u);
    double q = 0.0;
    if (au > rlo && au < rhi) {
      q += integrate_adaptive(f, rlo, au, icfg).value.real();
      q += integrate_adaptive(f, au, rhi, icfg).value.real();
    } else {
      q += integrate_adaptive(f, rlo, rhi, icfg).value.real();
    }
    return q;
  };
  auto acausal_f = [&](double u) { return u_weight(u) * Q(u); };
  QuadConfig ocfg = cfg;
  ocfg.rel_tol = std::max(cfg.rel_tol, 1e-6);
  QuadEstimate ae = integrate_adaptive(acausal_f, -U, U, ocfg);
  out.acausal = -pref * ae.value;

  out.total = out.causal + out.acausal;
  return out;
}

double mean_zero_crossing_spacing(const std::vector<double>& x,
                                  const std::vector<double>& y) {
  std::vector<double> crossings;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    if (y[i] == 0.0) continue;
    if ((y[i] > 0.0) != (y[i + 1] > 0.0)) {
      const double f = y[i] / (y[i] - y[i + 1]);
      crossings.push_back(x[i] + f * (x[i + 1] - x[i]));
    }
  }
  if (crossings.size() < 2) return 0.0;
  return (crossings.back() - crossings.front()) / (double)(crossings.size() - 1);
}

}  // namespace covband
