#pragma once

#include <vector>

namespace spsim::estimators {

struct Spectrum {
  std::vector<double> wavelength_nm;  // strictly increasing
  std::vector<double> intensity;

  void validate() const;
};

struct PolarScan {
  std::vector<double> angle_deg;
  std::vector<double> intensity;

  void validate() const;  // >= 8 distinct angles (mod 360) spanning >= 180 degrees
};

struct DecayTrace {
  std::vector<double> time_ps;  // bin centres, uniform spacing
  std::vector<double> counts;
  double irf_fwhm_ps = 20.0;

  void validate() const;
  double bin_ps() const { return time_ps.size() > 1 ? time_ps[1] - time_ps[0] : 0.0; }
};

struct ImageFrame {
  int rows = 0;
  int cols = 0;
  std::vector<double> pixels;  // row-major
  double pixel_pitch_nm = 1.0;
  double saturation_level = 65535.0;

  void validate() const;
  double at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * cols + c]; }
};

}  // namespace spsim::estimators
