#include "spsim/estimators/data.hpp"

#include <algorithm>
#include <cmath>

#include "spsim/errors.hpp"

namespace spsim::estimators {

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void Spectrum::validate() const {
  require(wavelength_nm.size() == intensity.size(), "spectrum arrays differ in length");
  require(wavelength_nm.size() >= 8, "spectrum needs at least 8 samples");
  require(all_finite(wavelength_nm) && all_finite(intensity), "spectrum contains non-finite values");
  for (std::size_t i = 1; i < wavelength_nm.size(); ++i)
    require(wavelength_nm[i] > wavelength_nm[i - 1], "spectrum wavelengths must be strictly increasing");
  for (double v : intensity) require(v >= 0, "spectrum intensities must be non-negative");
}

void PolarScan::validate() const {
  require(angle_deg.size() == intensity.size(), "polar scan arrays differ in length");
  require(all_finite(angle_deg) && all_finite(intensity), "polar scan contains non-finite values");
  for (double v : intensity) require(v >= 0, "polar scan intensities must be non-negative");
  std::vector<double> a = angle_deg;
  std::sort(a.begin(), a.end());
  const auto distinct = std::unique(a.begin(), a.end(), [](double x, double y) { return std::abs(x - y) < 1e-9; });
  require(distinct - a.begin() >= 8, "polar scan needs at least 8 distinct angles");
  require(*(distinct - 1) - a.front() >= 180.0 - 1e-9,
          "polar scan must span at least 180 degrees");
}

void DecayTrace::validate() const {
  require(time_ps.size() == counts.size(), "decay trace arrays differ in length");
  require(time_ps.size() >= 16, "decay trace needs at least 16 bins");
  require(all_finite(time_ps) && all_finite(counts), "decay trace contains non-finite values");
  require(irf_fwhm_ps >= 0 && std::isfinite(irf_fwhm_ps), "IRF FWHM must be non-negative");
  for (double c : counts) require(c >= 0, "decay counts must be non-negative");
  const double dt = time_ps[1] - time_ps[0];
  require(dt > 0, "decay time bins must increase");
  for (std::size_t i = 1; i < time_ps.size(); ++i)
    require(std::abs(time_ps[i] - time_ps[i - 1] - dt) <= 1e-6 * dt, "decay time bins must be uniform");
}

void ImageFrame::validate() const {
  require(rows >= 5 && cols >= 5, "image must be at least 5x5 pixels");
  require(pixels.size() == static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
          "image is not rectangular");
  require(all_finite(pixels), "image contains non-finite values");
  for (double v : pixels) require(v >= 0, "image counts must be non-negative");
  require(pixel_pitch_nm > 0 && std::isfinite(pixel_pitch_nm), "pixel pitch must be positive");
}

}  // namespace spsim::estimators
