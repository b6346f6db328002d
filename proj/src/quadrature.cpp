#include "covband/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace covband {

namespace {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1] (QUADPACK dqk15).
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  cplx value;
  double error;
};

Panel gk15(const Integrand& f, double a, double b, long& evals) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  cplx fv[15];
  for (int j = 0; j < 7; ++j) {
    fv[j] = f(c - h * xgk[j]);
    fv[14 - j] = f(c + h * xgk[j]);
  }
  fv[7] = f(c);
  evals += 15;
  for (int j = 0; j < 15; ++j) {
    if (!std::isfinite(fv[j].real()) || !std::isfinite(fv[j].imag()))
      throw QuadError("non-finite integrand value at x=" +
                      std::to_string(c + h * ((j < 8) ? -xgk[j] : xgk[14 - j])));
  }
  cplx resk = wgk[7] * fv[7];
  cplx resg = wg[3] * fv[7];
  for (int j = 0; j < 7; ++j) {
    resk += wgk[j] * (fv[j] + fv[14 - j]);
    if (j % 2 == 1) resg += wg[j / 2] * (fv[j] + fv[14 - j]);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = resk * h;
  p.error = std::abs((resk - resg) * h);
  return p;
}

bool within_tol(double err, const cplx& value, const QuadConfig& cfg) {
  return err <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(value));
}

}  // namespace

QuadEstimate integrate_adaptive(const Integrand& f, double a, double b,
                                const QuadConfig& cfg) {
  QuadEstimate est;
  if (!(a < b)) throw QuadError("integrate_adaptive: requires a < b");
  std::vector<Panel> panels;
  panels.push_back(gk15(f, a, b, est.evaluations));
  for (int iter = 0; iter < cfg.max_subdivisions; ++iter) {
    cplx total{0.0, 0.0};
    double err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    est.value = total;
    est.abs_error = err;
    if (within_tol(err, total, cfg)) {
      est.converged = true;
      return est;
    }
    const Panel w = panels[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (mid <= w.a || mid >= w.b) break;  // panel width at rounding limit
    panels[worst] = gk15(f, w.a, mid, est.evaluations);
    panels.push_back(gk15(f, mid, w.b, est.evaluations));
  }
  cplx total{0.0, 0.0};
  double err = 0.0;
  for (const Panel& p : panels) {
    total += p.value;
    err += p.error;
  }
  est.value = total;
  est.abs_error = err;
  est.converged = within_tol(err, total, cfg);
  return est;
}

std::pair<cplx, double> wynn_epsilon(const std::vector<cplx>& s) {
  const std::size_t n = s.size();
  if (n == 0) return {cplx{0.0, 0.0}, std::numeric_limits<double>::infinity()};
  if (n == 1) return {s[0], std::numeric_limits<double>::infinity()};
  std::vector<cplx> prev(n, cplx{0.0, 0.0});  // epsilon_{-1}
  std::vector<cplx> cur(s);                   // epsilon_0
  cplx best = s.back();
  double err = std::abs(s[n - 1] - s[n - 2]);
  for (std::size_t k = 1; k + 1 <= n; ++k) {
    std::vector<cplx> next(cur.size() - 1);
    bool bad = false;
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const cplx d = cur[i + 1] - cur[i];
      if (std::abs(d) == 0.0) {
        // converged exactly; the even-column neighbour is the answer
        next[i] = prev[i + 1];
        continue;
      }
      next[i] = prev[i + 1] + 1.0 / d;
      if (!std::isfinite(next[i].real()) || !std::isfinite(next[i].imag()))
        bad = true;
    }
    if (bad || next.empty()) break;
    prev.swap(cur);
    cur.swap(next);
    if (k % 2 == 0 && cur.size() >= 2) {
      best = cur.back();
      err = std::abs(cur[cur.size() - 1] - cur[cur.size() - 2]);
    }
  }
  return {best, err};
}

QuadEstimate integrate_semi_infinite_oscillatory(
    const Integrand& amplitude, const std::function<double(long)>& zeros,
    double a, const QuadConfig& cfg) {
  QuadEstimate est;
  const int window = std::max(3, cfg.accel_terms);
  std::vector<cplx> partial;
  cplx sum{0.0, 0.0};
  double lobe_err = 0.0;
  double lo = a;
  long n = 0;
  while (zeros(n) <= a) {
    ++n;
    if (n > 1000000) throw QuadError("oscillatory zeros never exceed a");
  }
  const double z0 = zeros(n);
  if (z0 > a) {
    QuadEstimate head = integrate_adaptive(amplitude, a, z0, cfg);
    sum += head.value;
    lobe_err += head.abs_error;
    est.evaluations += head.evaluations;
    lo = z0;
    ++n;
  }
  // past a few hundred lobes epsilon acceleration has either locked in or
  // never will; the cap keeps slowly converging tails from grinding
  const long max_lobes = std::max(4 * window, 256);
  for (long lobe = 0; lobe < max_lobes; ++lobe) {
    const double hi = zeros(n + lobe);
    if (!(hi > lo)) throw QuadError("oscillatory zeros not increasing");
    QuadEstimate piece = integrate_adaptive(amplitude, lo, hi, cfg);
    sum += piece.value;
    lobe_err += piece.abs_error;
    est.evaluations += piece.evaluations;
    partial.push_back(sum);
    lo = hi;
    if ((long)partial.size() >= window) {
      std::vector<cplx> win(partial.end() - window, partial.end());
      auto [val, acc_err] = wynn_epsilon(win);
      est.value = val;
      est.abs_error = acc_err + lobe_err;
      if (within_tol(est.abs_error, val, cfg)) {
        est.converged = true;
        return est;
      }
    }
  }
  if (partial.size() >= 2) {
    std::vector<cplx> win(partial.end() -
                              std::min<std::size_t>(window, partial.size()),
                          partial.end());
    auto [val, acc_err] = wynn_epsilon(win);
    est.value = val;
    est.abs_error = acc_err + lobe_err;
    est.converged = within_tol(est.abs_error, val, cfg);
  }
  return est;
}

QuadEstimate integrate_principal_value(const Integrand& f, const PVSpec& pv,
                                       const QuadConfig& cfg) {
  const double c = pv.singularity;
  if (!(pv.a < c && c < pv.b))
    throw QuadError("integrate_principal_value: pole not interior");
  const double h = std::min(c - pv.a, pv.b - c);
  auto paired = [&](double u) { return f(c + u) + f(c - u); };
  // pole-order probe: for a simple pole the paired sum stays bounded as u->0
  {
    const double u1 = 1e-4 * h;
    const double u2 = 1e-8 * h;
    const double s1 = std::abs(paired(u1));
    const double s2 = std::abs(paired(u2));
    if (s2 > 50.0 * (s1 + 1.0) && s2 > 1e6)
      throw QuadError("integrate_principal_value: pole order > 1 detected");
  }
  QuadEstimate est = integrate_adaptive(paired, 0.0, h, cfg);
  est.evaluations += 6;
  const double edge_tol = 1e-13 * (pv.b - pv.a);
  if (c - pv.a > h + edge_tol) {
    QuadEstimate rest = integrate_adaptive(f, pv.a, c - h, cfg);
    est.value += rest.value;
    est.abs_error += rest.abs_error;
    est.evaluations += rest.evaluations;
    est.converged = est.converged && rest.converged;
  } else if (pv.b - c > h + edge_tol) {
    QuadEstimate rest = integrate_adaptive(f, c + h, pv.b, cfg);
    est.value += rest.value;
    est.abs_error += rest.abs_error;
    est.evaluations += rest.evaluations;
    est.converged = est.converged && rest.converged;
  }
  return est;
}

QuadEstimate integrate_sqrt_endpoint(const Integrand& f, double a, double b,
                                     const QuadConfig& cfg) {
  if (!(a < b)) throw QuadError("integrate_sqrt_endpoint: requires a < b");
  // below u_floor the shift u^2 rounds away against a; freezing the
  // evaluation point there changes the integral by O(u_floor^2)
  const double u_floor = 1e-6 * std::sqrt(b - a);
  auto g = [&](double u) {
    const double ue = std::max(u, u_floor);
    return 2.0 * ue * f(a + ue * ue);
  };
  QuadEstimate est = integrate_adaptive(g, 0.0, std::sqrt(b - a), cfg);
  // divergence stronger than 1/sqrt shows up as growth of u*f(a+u^2) at u->0;
  // probes stay at moderate u so that a+u^2 does not cancel back to a
  const double u1 = 1e-4 * std::sqrt(b - a);
  const double u2 = 1e-6 * std::sqrt(b - a);
  const double g1 = std::abs(g(u1));
  const double g2 = std::abs(g(u2));
  est.evaluations += 2;
  if (g2 > 30.0 * (g1 + 1.0) && g2 > 1e4)
    throw QuadError("integrate_sqrt_endpoint: divergence stronger than 1/sqrt");
  return est;
}

}  // namespace covband
