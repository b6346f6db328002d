#pragma once

#include <string>
#include <vector>

#include "covband/field.hpp"
#include "covband/quadrature.hpp"

namespace covband {

struct ChannelSample {
  double r;
  double t;
  double lambda_cutoff;
  double value;
  std::string method;  // lambda_form | pv_oracle
  QuadEstimate estimate;
};

struct SignalAmplitude {
  cplx causal;
  cplx acausal;
  cplx total;
  bool overlap_warning = false;  // d <= 4 sigma
};

// Acausal term I_Lambda(r,t) through the two-sided frequency representation
// (sqrt-endpoint head at omega=Lambda plus phase-split oscillatory tails).
ChannelSample acausal_term(double r, double t, double lambda_cutoff,
                           const QuadConfig& cfg = {});

// Independent representation: outer sin(omega r) lobes over the inner
// principal-value integral on the nu band intervals.
ChannelSample acausal_term_pv_oracle(double r, double t, double lambda_cutoff,
                                     const QuadConfig& cfg = {});

// r * I_Lambda(r, 0) over a grid; points evaluated independently (OpenMP when
// enabled) and returned in input order.
std::vector<ChannelSample> decay_profile(const std::vector<double>& r_grid,
                                         double lambda_cutoff,
                                         const QuadConfig& cfg = {},
                                         int threads = 1);

// Closed Bessel form of the shared tail difference S(r,t); fast evaluator used
// inside the smeared-signal quadratures and as a third cross-check in tests.
double acausal_S_closed(double r, double t, double lambda_cutoff);
double acausal_term_closed(double r, double t, double lambda_cutoff);

// Inter-Gaussian distance density between two isotropic 3D Gaussians with
// per-axis variance sigma^2 and center distance d.
double inter_gaussian_distance_density(double r, double d, double sigma);

// Leading-order channel amplitude of the smeared two-detector protocol with
// the fixed phase convention W = e^{i Omega_A s} e^{i Omega_B s'}.
SignalAmplitude smeared_signal(const DetectorSpec& detA,
                               const DetectorSpec& detB, double d,
                               double lambda_cutoff, const QuadConfig& cfg = {});

// Mean spacing between sign changes of a sampled curve; 0 if fewer than two.
double mean_zero_crossing_spacing(const std::vector<double>& x,
                                  const std::vector<double>& y);

}  // namespace covband
