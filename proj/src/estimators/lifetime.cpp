#include "spsim/estimators/lifetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::estimators {

namespace {

// exp(z^2) erfc(z) for z > 8 from its asymptotic series.
double erfcx_large(double z) {
  const double inv = 1.0 / (2.0 * z * z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    sum += term;
  }
  return sum / (z * std::sqrt(units::pi));
}

struct TailGuess {
  double tau;
  double background;
};

TailGuess log_linear_tail(const DecayTrace& tr, std::size_t peak) {
  const auto& t = tr.time_ps;
  const auto& y = tr.counts;
  const std::size_t n = y.size();
  const std::size_t tail = std::max<std::size_t>(n / 10, 3);
  double bg = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) bg += y[i];
  bg /= static_cast<double>(tail);
  if (peak >= 3) {
    double pre = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(peak / 2 + 1, peak); ++i) pre += y[i];
    bg = std::min(bg, pre / static_cast<double>(std::min<std::size_t>(peak / 2 + 1, peak)));
  }
  const double height = y[peak] - bg;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
  for (std::size_t i = peak; i < n; ++i) {
    const double v = y[i] - bg;
    if (v < 0.02 * height) break;
    if (v > 0.9 * height && i != peak) continue;
    const double ly = std::log(v);
    sx += t[i];
    sy += ly;
    sxx += t[i] * t[i];
    sxy += t[i] * ly;
    m += 1;
  }
  double tau = 0.0;
  if (m >= 3) {
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (slope < 0) tau = -1.0 / slope;
  }
  if (!(tau > 0)) {
    // Fall back to the 1/e crossing.
    std::size_t i = peak;
    while (i + 1 < n && y[i] - bg > height / std::exp(1.0)) ++i;
    tau = std::max(t[i] - t[peak], tr.bin_ps());
  }
  return {tau, std::max(bg, 0.0)};
}

}  // namespace

double exp_gaussian(double t, double t0, double tau, double sigma) {
  const double u = t - t0;
  if (sigma <= 0) return u >= 0 ? std::exp(-u / tau) : 0.0;
  const double z = (sigma / tau - u / sigma) / std::sqrt(2.0);
  if (z > 8.0) return 0.5 * std::exp(-u * u / (2.0 * sigma * sigma)) * erfcx_large(z);
  return 0.5 * std::exp(sigma * sigma / (2.0 * tau * tau) - u / tau) * std::erfc(z);
}

LifetimeFit fit_exp_lifetime(const DecayTrace& trace) {
  trace.validate();
  const auto& t = trace.time_ps;
  const auto& y = trace.counts;
  const std::size_t n = y.size();
  const double bin = trace.bin_ps();
  const auto peak = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  require(y[peak] > 0, "decay trace has no counts");
  const TailGuess guess = log_linear_tail(trace, peak);
  const double sigma = units::gaussian_sigma_from_fwhm(trace.irf_fwhm_ps);
  const double inf = std::numeric_limits<double>::infinity();

  LifetimeFit out;
  FitOptions opt;
  opt.loss = Loss::poisson;
  Eigen::VectorXd data;
  ModelFn model;
  Eigen::VectorXd start;
  int tau_index;

  if (sigma == 0.0) {
    const std::size_t m = n - peak;
    require(m >= 4, "too few bins after the decay peak");
    data = Eigen::Map<const Eigen::VectorXd>(y.data() + peak, static_cast<Eigen::Index>(m));
    const double tp = t[peak];
    model = [&t, peak, tp, m](const Eigen::VectorXd& p, Eigen::VectorXd& f) {
      f.resize(static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < m; ++i)
        f[static_cast<Eigen::Index>(i)] = std::max(p[0] * std::exp(-(t[peak + i] - tp) / p[1]) + p[2], 1e-12);
    };
    start.resize(3);
    start << std::max(y[peak] - guess.background, 1e-6), guess.tau, guess.background;
    opt.lower = Eigen::Vector3d(0.0, 1e-3 * bin, 0.0);
    opt.scale = Eigen::Vector3d(y[peak], guess.tau, std::max(guess.background, 1.0));
    tau_index = 1;
  } else {
    data = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
    model = [&t, n, sigma](const Eigen::VectorXd& p, Eigen::VectorXd& f) {
      f.resize(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i)
        f[static_cast<Eigen::Index>(i)] = std::max(p[0] * exp_gaussian(t[i], p[1], p[2], sigma) + p[3], 1e-12);
    };
    const double t0 = t[peak] - 0.5 * sigma;
    const double shape = exp_gaussian(t[peak], t0, guess.tau, sigma);
    start.resize(4);
    start << std::max(y[peak] - guess.background, 1e-6) / std::max(shape, 1e-3), t0, guess.tau, guess.background;
    opt.lower = Eigen::Vector4d(0.0, -inf, 1e-3 * bin, 0.0);
    opt.scale = Eigen::Vector4d(y[peak], std::max(sigma, bin), guess.tau, std::max(guess.background, 1.0));
    tau_index = 2;
  }

  FitResult fit = levenberg_marquardt(model, data, start, opt);
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "lifetime fit did not converge (" << fit.message << "); deviance " << fit.cost << " over " << data.size()
        << " bins";
    throw NumericalError(msg.str());
  }
  out.tau_ps = fit.params[tau_index];
  out.tau_sigma_ps = fit.sigma(tau_index);
  if (sigma == 0.0) {
    out.amplitude = fit.params[0];
    out.t0_ps = t[peak];
    out.background = fit.params[2];
  } else {
    out.amplitude = fit.params[0];
    out.t0_ps = fit.params[1];
    out.background = fit.params[3];
  }
  out.fit = std::move(fit);

  const double span = t.back() - std::max(out.t0_ps, t.front());
  if (span < 5.0 * out.tau_ps) {
    std::ostringstream msg;
    msg << "decay trace spans " << span / out.tau_ps << " lifetimes; at least 5 are required";
    throw ValidationError(msg.str());
  }
  if (out.tau_ps < 2.0 * bin) out.warnings.push_back("lifetime is shorter than two time bins; resolution limited");
  return out;
}

}  // namespace spsim::estimators
