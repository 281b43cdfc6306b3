#pragma once

#include <string>
#include <vector>

#include "spsim/estimators/data.hpp"
#include "spsim/estimators/least_squares.hpp"

namespace spsim::estimators {

struct SpotFit {
  double x_nm = 0.0;  // column direction, pixel centres at integer multiples of the pitch
  double y_nm = 0.0;  // row direction
  double sigma_nm = 0.0;
  double uncertainty_nm = 0.0;  // per-axis centroid standard error
  double amplitude = 0.0;
  double background = 0.0;
  bool saturated = false;
  FitResult fit;
  std::vector<std::string> warnings;
};

// Least-squares isotropic 2D Gaussian plus constant background.
SpotFit fit_gaussian_centroid_2d(const ImageFrame& img);

}  // namespace spsim::estimators
