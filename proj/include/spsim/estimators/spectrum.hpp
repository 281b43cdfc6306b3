#pragma once

#include "spsim/estimators/data.hpp"
#include "spsim/estimators/least_squares.hpp"

namespace spsim::estimators {

struct LorentzianPeak {
  double center_nm = 0.0;
  double fwhm_nm = 0.0;
  double amplitude = 0.0;
  double center_sigma_nm = 0.0;
  double fwhm_sigma_nm = 0.0;
};

struct DoubletFit {
  LorentzianPeak first;   // shorter wavelength
  LorentzianPeak second;
  double background = 0.0;
  double splitting_ghz = 0.0;
  FitResult fit;
  double relative_residual = 0.0;  // residual norm over signal norm
};

// Two Lorentzians plus a constant, started from the two most prominent maxima.
// Throws ValidationError when only one peak is found or the peaks overlap, and
// NumericalError when the fit does not converge.
DoubletFit fit_lorentzian_doublet(const Spectrum& s);

double lorentzian(double x, double center, double fwhm, double amplitude);

}  // namespace spsim::estimators
