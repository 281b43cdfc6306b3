#pragma once

#include "spsim/estimators/data.hpp"

namespace spsim::estimators {

struct MalusFit {
  double dop = 0.0;
  double dop_sigma = 0.0;
  double axis_deg = 0.0;  // in [0, 180)
  bool axis_defined = true;
  double amplitude = 0.0;   // A in A cos^2(theta - theta0) + B
  double background = 0.0;  // B
  double residual_norm = 0.0;
};

// Linear least squares on the 0th and 2nd angular harmonics.
MalusFit fit_malus_dop(const PolarScan& scan);

}  // namespace spsim::estimators
