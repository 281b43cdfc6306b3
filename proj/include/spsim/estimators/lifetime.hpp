#pragma once

#include <string>
#include <vector>

#include "spsim/estimators/data.hpp"
#include "spsim/estimators/least_squares.hpp"

namespace spsim::estimators {

struct LifetimeFit {
  double tau_ps = 0.0;
  double tau_sigma_ps = 0.0;
  double t0_ps = 0.0;
  double amplitude = 0.0;
  double background = 0.0;
  FitResult fit;
  std::vector<std::string> warnings;
};

// Exponential decay convolved with a Gaussian IRF (peak-normalized so that
// amplitude is the undelayed decay height), evaluated at time t.
double exp_gaussian(double t, double t0, double tau, double sigma);

// Poisson maximum-likelihood fit of A exp_gaussian(t; t0, tau, sigma_irf) + bg.
// With a zero IRF the fit starts at the peak bin with A exp(-(t - t_peak)/tau) + bg.
LifetimeFit fit_exp_lifetime(const DecayTrace& trace);

}  // namespace spsim::estimators
