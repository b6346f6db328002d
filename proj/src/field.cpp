#include "covband/field.hpp"

#include <cmath>

#include <gsl/gsl_sf_expint.h>

namespace covband {

namespace {

constexpr double kPi = 3.14159265358979323846;

double exclusion_width(double r) { return 1e-3 * std::max(r, 1.0); }

// PV integral of e^{i nu t}/nu over one straddling interval [lo,hi],
// lo < 0 < hi, in Si/Ci closed form; smooth in k when the endpoints vary
// slowly.
cplx straddle_phase(double lo, double hi, double t) {
  const double at = std::abs(t);
  if (at == 0.0) return cplx(std::log(hi / (-lo)), 0.0);
  const double sg = (t > 0.0) ? 1.0 : -1.0;
  return cplx(gsl_sf_Ci(at * hi) - gsl_sf_Ci(at * (-lo)),
              sg * (gsl_sf_Si(at * hi) + gsl_sf_Si(at * (-lo))));
}

// ordinary integral of e^{i nu t}/nu over a regular interval 0 < lo < hi
cplx regular_phase(double lo, double hi, double t) {
  const double at = std::abs(t);
  if (at == 0.0) return cplx(std::log(hi / lo), 0.0);
  const double sg = (t > 0.0) ? 1.0 : -1.0;
  return cplx(gsl_sf_Ci(at * hi) - gsl_sf_Ci(at * lo),
              sg * (gsl_sf_Si(at * hi) - gsl_sf_Si(at * lo)));
}

// PV(+ ordinary) integral of e^{i nu t}/ nu over the admissible band
// intervals.  The first interval always straddles nu=0; any second interval
// is regular.
cplx band_phase_integral(double k, double t, const BandRegion& band,
                         const QuadConfig& /*cfg*/, long& evals) {
  cplx total{0.0, 0.0};
  bool first = true;
  for (const auto& [lo, hi] : nu_band_intervals(k, band)) {
    evals += 4;
    total += first ? straddle_phase(lo, hi, t) : regular_phase(lo, hi, t);
    first = false;
  }
  return total;
}

// Tail of int_W^inf g(k) e^{i phase_rate k} dk where g varies slowly:
// doubling blocks while the oscillation is slower than the block scale, then
// lobe sums at spacing pi/|phase_rate| with epsilon acceleration.
QuadEstimate oscillatory_tail(const Integrand& component, double W,
                              double phase_rate, const QuadConfig& cfg_in) {
  QuadEstimate out;
  // the partial-sum series converges slowly (the band phase factor carries a
  // log-scale envelope); use a wide acceleration window and a tolerance tied
  // to the outer-integral scale rather than the final kernel scale
  QuadConfig cfg = cfg_in;
  cfg.accel_terms = std::max(cfg_in.accel_terms, 48);
  cfg.abs_tol = std::max(cfg_in.abs_tol, 1e-9);
  cfg.rel_tol = std::max(cfg_in.rel_tol, 1e-8);
  const double freq = std::abs(phase_rate);
  double start = W;
  if (freq * W < 2.0 && freq > 0.0) {
    const double stop = 2.0 / freq;
    while (start < stop) {
      const double next = std::min(2.0 * start, stop);
      QuadEstimate blk = integrate_adaptive(component, start, next, cfg);
      out.value += blk.value;
      out.abs_error += blk.abs_error;
      out.evaluations += blk.evaluations;
      start = next;
    }
  }
  const double dk = kPi / freq;
  const double base = start;
  QuadEstimate lobes = integrate_semi_infinite_oscillatory(
      component, [base, dk](long n) { return base + (double)n * dk; }, base,
      cfg);
  out.value += lobes.value;
  out.abs_error += lobes.abs_error;
  out.evaluations += lobes.evaluations;
  out.converged = lobes.converged;
  return out;
}

}  // namespace

bool on_lightcone_zone(const SpacetimeSeparation& sep) {
  return std::abs(std::abs(sep.t) - sep.r) <= exclusion_width(sep.r);
}

cplx wightman_massless(const SpacetimeSeparation& sep) {
  if (sep.epsilon == 0.0 && std::abs(sep.t) == sep.r)
    throw SingularPointError("wightman_massless: on the lightcone with eps=0");
  const cplx tm(sep.t, -sep.epsilon);
  return -1.0 / (4.0 * kPi * kPi * (tm * tm - sep.r * sep.r));
}

std::vector<std::pair<double, double>> nu_band_intervals(double k,
                                                         const BandRegion& band) {
  const double L = band.lambda_cutoff;
  if (!(L > 0.0)) throw QuadError("nu_band_intervals: invalid band, Lambda <= 0");
  if (k < 0.0) throw QuadError("nu_band_intervals: k < 0");
  const double outer = std::sqrt(k * k + L * L);
  if (k <= L) return {{k - outer, k + outer}};
  const double inner = std::sqrt(k * k - L * L);
  return {{k - outer, k - inner}, {k + inner, k + outer}};
}

CorrelatorValue bandlimited_timeordered_kernel(const SpacetimeSeparation& sep,
                                               const BandRegion& band,
                                               const QuadConfig& cfg) {
  const double t = sep.t;
  const double r = sep.r;
  const double L = band.lambda_cutoff;
  if (!(r > 0.0)) throw QuadError("bandlimited_timeordered_kernel: r <= 0");
  if (on_lightcone_zone(sep) && sep.epsilon == 0.0)
    throw SingularPointError(
        "bandlimited_timeordered_kernel: inside lightcone exclusion zone");
  const double eps = sep.epsilon;

  QuadEstimate acc;
  auto h = [&](double k) { return band_phase_integral(k, t, band, cfg, acc.evaluations); };

  // outer integrand sin(kr) e^{-ikt} h(k), split into the two exponential
  // components with asymptotic frequencies |r-t| and |r+t|
  auto full = [&](double k) {
    return std::sin(k * r) * std::exp(cplx(0.0, -k * t) - eps * k) * h(k);
  };

  // in the tail (k > Lambda) split h = h1 + e^{2ikt} C: h1 is the straddling
  // interval (smooth) and the second-interval part carries an e^{2ikt}
  // carrier (Ci/Si at argument ~2|t|k) with a smooth envelope C.  Factoring
  // the carrier out moves its oscillation into the explicit phases, so each
  // component below is a smooth envelope times a single exponential and the
  // lobe sums stay cheap even when |r-t| is small.
  auto h1 = [&](double k) {
    const auto iv = nu_band_intervals(k, band);
    acc.evaluations += 4;
    return straddle_phase(iv[0].first, iv[0].second, t);
  };
  auto envC = [&](double k) {
    const auto iv = nu_band_intervals(k, band);
    if (iv.size() < 2) return cplx(0.0, 0.0);
    acc.evaluations += 4;
    return regular_phase(iv[1].first, iv[1].second, t) *
           std::exp(cplx(0.0, -2.0 * t * k));
  };
  auto c1m = [&](double k) {  // e^{ik(r-t)} h1
    return std::exp(cplx(0.0, k * (r - t)) - eps * k) * h1(k) / cplx(0.0, 2.0);
  };
  auto c1p = [&](double k) {  // -e^{-ik(r+t)} h1
    return -std::exp(cplx(0.0, -k * (r + t)) - eps * k) * h1(k) / cplx(0.0, 2.0);
  };
  auto c2m = [&](double k) {  // e^{ik(r-t)} e^{2ikt} C = e^{ik(r+t)} C
    return std::exp(cplx(0.0, k * (r + t)) - eps * k) * envC(k) / cplx(0.0, 2.0);
  };
  auto c2p = [&](double k) {  // -e^{-ik(r+t)} e^{2ikt} C = -e^{-ik(r-t)} C
    return -std::exp(cplx(0.0, -k * (r - t)) - eps * k) * envC(k) / cplx(0.0, 2.0);
  };

  const double dk_head = kPi / (r + std::abs(t) + 1.0);
  const double W = std::max({3.0 * L, 10.0 / r, 10.0});
  cplx outer_val{0.0, 0.0};
  double k0 = 0.0;
  while (k0 < W) {
    const double k1 = std::min(k0 + dk_head, W);
    QuadEstimate blk = integrate_adaptive(full, k0, k1, cfg);
    outer_val += blk.value;
    acc.abs_error += blk.abs_error;
    acc.evaluations += blk.evaluations;
    k0 = k1;
  }
  acc.converged = true;
  for (const auto& [component, rate] :
       std::initializer_list<std::pair<Integrand, double>>{
           {c1m, r - t}, {c1p, r + t}, {c2m, r + t}, {c2p, r - t}}) {
    QuadEstimate ti = oscillatory_tail(component, W, rate, cfg);
    outer_val += ti.value;
    acc.abs_error += ti.abs_error;
    acc.evaluations += ti.evaluations;
    acc.converged = acc.converged && ti.converged;
  }

  const cplx pref = 1.0 / (cplx(0.0, 2.0 * kPi) * 4.0 * kPi * kPi * r);
  CorrelatorValue out;
  out.value = 0.5 * wightman_massless(sep) + pref * outer_val;
  acc.value = out.value;
  out.estimate = acc;
  return out;
}

double apply_band_projector_gaussian(double w, double t, double r,
                                     const BandRegion& band,
                                     const QuadConfig& cfg) {
  if (!(w > 0.0)) throw QuadError("apply_band_projector_gaussian: w <= 0");
  const double L = band.lambda_cutoff;
  const double kcap = 10.0 / w;
  auto inner = [&](double k) -> double {
    const double lo = std::sqrt(std::max(0.0, k * k - L * L));
    const double hi = std::min(std::sqrt(k * k + L * L), kcap);
    if (lo >= hi) return 0.0;
    auto g = [&](double k0) {
      return cplx(std::cos(k0 * t) * std::exp(-0.5 * w * w * k0 * k0), 0.0);
    };
    return 2.0 * integrate_adaptive(g, lo, hi, cfg).value.real();
  };
  auto outer = [&](double k) -> cplx {
    const double s = (k * r < 1e-12) ? 1.0 : std::sin(k * r) / (k * r);
    return cplx(k * k * s * std::exp(-0.5 * w * w * k * k) * inner(k), 0.0);
  };
  const double w4 = w * w * w * w;
  return (w4 / kPi) * integrate_adaptive(outer, 0.0, kcap, cfg).value.real();
}

}  // namespace covband
