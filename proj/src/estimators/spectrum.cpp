#include "spsim/estimators/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spsim/errors.hpp"
#include "spsim/model.hpp"

namespace spsim::estimators {

double lorentzian(double x, double center, double fwhm, double amplitude) {
  const double u = 2.0 * (x - center) / fwhm;
  return amplitude / (1.0 + u * u);
}

namespace {

struct Peak {
  std::size_t index;
  double prominence;
};

std::vector<Peak> prominent_peaks(const std::vector<double>& y) {
  std::vector<Peak> peaks;
  const std::size_t n = y.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    double left_min = y[i], right_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    for (std::size_t k = i + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    peaks.push_back({i, y[i] - std::max(left_min, right_min)});
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
  return peaks;
}

// Full width at half prominence, walking out from the peak.
double half_width(const std::vector<double>& x, const std::vector<double>& y, std::size_t i, double base) {
  const double half = base + 0.5 * (y[i] - base);
  std::size_t l = i, r = i;
  while (l > 0 && y[l] > half) --l;
  while (r + 1 < y.size() && y[r] > half) ++r;
  return std::max(x[r] - x[l], x[1] - x[0]);
}

}  // namespace

DoubletFit fit_lorentzian_doublet(const Spectrum& s) {
  s.validate();
  const auto& x = s.wavelength_nm;
  const auto& y = s.intensity;
  const double y_min = *std::min_element(y.begin(), y.end());
  const double y_max = *std::max_element(y.begin(), y.end());
  require(y_max > y_min, "spectrum is flat");

  const auto peaks = prominent_peaks(y);
  if (peaks.size() < 2 || peaks[1].prominence < 0.05 * (y_max - y_min)) {
    throw ValidationError("spectrum shows a single peak; doublet is not resolvable");
  }
  std::size_t i1 = peaks[0].index, i2 = peaks[1].index;
  if (x[i1] > x[i2]) std::swap(i1, i2);
  const double w1 = half_width(x, y, i1, y_min);
  const double w2 = half_width(x, y, i2, y_min);
  if (x[i2] - x[i1] <= 0.5 * std::max(w1, w2)) {
    throw ValidationError("doublet peaks overlap beyond half a linewidth; not resolvable");
  }

  // Centred coordinates keep the centre parameters well conditioned.
  const double x_ref = 0.5 * (x.front() + x.back());
  Eigen::VectorXd data = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  ModelFn model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& f) {
    f.resize(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double xi = x[i] - x_ref;
      f[static_cast<Eigen::Index>(i)] = p[0] + lorentzian(xi, p[2], p[3], p[1]) + lorentzian(xi, p[5], p[6], p[4]);
    }
  };
  Eigen::VectorXd start(7);
  start << y_min, y[i1] - y_min, x[i1] - x_ref, w1, y[i2] - y_min, x[i2] - x_ref, w2;
  FitOptions opt;
  opt.lower = Eigen::VectorXd::Constant(7, -std::numeric_limits<double>::infinity());
  opt.lower[3] = opt.lower[6] = 1e-6 * (x.back() - x.front());
  opt.scale = Eigen::VectorXd::Constant(7, x.back() - x.front());
  opt.scale[0] = opt.scale[1] = opt.scale[4] = y_max;
  FitResult fit = levenberg_marquardt(model, data, start, opt);

  const double signal = data.norm();
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "doublet fit did not converge (" << fit.message << "); residual norm " << fit.residual_norm
        << " of signal norm " << signal;
    throw NumericalError(msg.str());
  }

  DoubletFit out;
  auto peak = [&](int a, int c, int w) {
    return LorentzianPeak{fit.params[c] + x_ref, std::abs(fit.params[w]), fit.params[a], fit.sigma(c), fit.sigma(w)};
  };
  out.first = peak(1, 2, 3);
  out.second = peak(4, 5, 6);
  if (out.first.center_nm > out.second.center_nm) std::swap(out.first, out.second);
  out.background = fit.params[0];
  out.splitting_ghz = model::splitting_from_wavelengths(out.first.center_nm, out.second.center_nm);
  out.relative_residual = fit.residual_norm / signal;
  out.fit = std::move(fit);
  return out;
}

}  // namespace spsim::estimators
