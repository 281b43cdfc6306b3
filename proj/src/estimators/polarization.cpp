#include "spsim/estimators/polarization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::estimators {

MalusFit fit_malus_dop(const PolarScan& scan) {
  scan.validate();
  const auto n = static_cast<Eigen::Index>(scan.angle_deg.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double th = 2.0 * scan.angle_deg[i] * units::pi / 180.0;
    X(i, 0) = 1.0;
    X(i, 1) = std::cos(th);
    X(i, 2) = std::sin(th);
    y[i] = scan.intensity[i];
  }
  const Eigen::MatrixXd XtX = X.transpose() * X;
  const Eigen::VectorXd c = XtX.ldlt().solve(X.transpose() * y);
  const Eigen::VectorXd r = y - X * c;

  MalusFit out;
  out.residual_norm = r.norm();
  const double half_amp = std::hypot(c[1], c[2]);
  out.amplitude = 2.0 * half_amp;
  out.background = c[0] - half_amp;
  require(c[0] > 0, "polar scan has no signal");
  if (half_amp <= 1e-12 * std::abs(c[0])) {
    out.dop = 0.0;
    out.axis_defined = false;
    out.axis_deg = 0.0;
  } else {
    // DOP = A / (A + 2B) = |c_2theta| / c0
    out.dop = half_amp / c[0];
    double axis = 0.5 * std::atan2(c[2], c[1]) * 180.0 / units::pi;
    axis = std::fmod(axis, 180.0);
    if (axis < 0) axis += 180.0;
    out.axis_deg = axis;
  }
  if (n > 3) {
    const Eigen::MatrixXd cov = XtX.inverse() * (r.squaredNorm() / static_cast<double>(n - 3));
    Eigen::Vector3d grad;
    if (half_amp > 0) {
      grad << -half_amp / (c[0] * c[0]), c[1] / (half_amp * c[0]), c[2] / (half_amp * c[0]);
    } else {
      grad << 0.0, 0.0, 0.0;
    }
    out.dop_sigma = std::sqrt(std::max(grad.dot(cov * grad), 0.0));
  }
  return out;
}

}  // namespace spsim::estimators
