#include "spsim/estimators/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::estimators {

namespace {

double border_stats(const ImageFrame& img, double& mean) {
  double s = 0, s2 = 0, n = 0;
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) {
      if (r != 0 && c != 0 && r != img.rows - 1 && c != img.cols - 1) continue;
      const double v = img.at(r, c);
      s += v;
      s2 += v * v;
      n += 1;
    }
  mean = s / n;
  return std::sqrt(std::max(s2 / n - mean * mean, 0.0));
}

// 3x3 box average (edge pixels use their available neighbours).
std::vector<double> smoothed(const ImageFrame& img) {
  std::vector<double> out(img.pixels.size());
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) {
      double s = 0, n = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || cc < 0 || rr >= img.rows || cc >= img.cols) continue;
          s += img.at(rr, cc);
          n += 1;
        }
      out[static_cast<std::size_t>(r) * img.cols + c] = s / n;
    }
  return out;
}

}  // namespace

SpotFit fit_gaussian_centroid_2d(const ImageFrame& img) {
  img.validate();
  SpotFit out;
  double bg0 = 0.0;
  const double noise = border_stats(img, bg0);
  const auto peak_it = std::max_element(img.pixels.begin(), img.pixels.end());
  const double peak = *peak_it - bg0;
  if (!(peak > 0) || peak <= 5.0 * noise) {
    throw ValidationError("no dominant spot: peak is not above 5x the border noise");
  }
  out.saturated = std::any_of(img.pixels.begin(), img.pixels.end(),
                              [&](double v) { return v >= img.saturation_level; });
  if (out.saturated) out.warnings.push_back("image contains saturated pixels; centroid may be biased");

  // Moments of the above-half-maximum region seed the fit.
  double sw = 0, sx = 0, sy = 0;
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) {
      const double v = img.at(r, c) - bg0;
      if (v < 0.5 * peak) continue;
      sw += v;
      sx += v * c;
      sy += v * r;
    }
  const double x0 = sx / sw, y0 = sy / sw;
  double s0 = 0;
  {
    double area = 0;
    for (double v : img.pixels) area += (v - bg0 >= 0.5 * peak) ? 1.0 : 0.0;
    s0 = std::max(std::sqrt(area / (2.0 * units::pi * std::log(2.0))), 0.5);
  }

  // A second local maximum of the smoothed image, well separated from the main
  // one and at least half as high, means several comparable spots.
  const auto sm = smoothed(img);
  const double sm_peak = *std::max_element(sm.begin(), sm.end()) - bg0;
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) {
      const double v = sm[static_cast<std::size_t>(r) * img.cols + c];
      if (v - bg0 < 0.5 * sm_peak) continue;
      if (std::hypot(c - x0, r - y0) < 3.0 * s0) continue;
      bool is_max = true;
      for (int dr = -1; dr <= 1 && is_max; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = r + dr, cc = c + dc;
          if ((dr || dc) && rr >= 0 && cc >= 0 && rr < img.rows && cc < img.cols &&
              sm[static_cast<std::size_t>(rr) * img.cols + cc] > v) {
            is_max = false;
            break;
          }
        }
      if (is_max) throw ValidationError("image contains multiple comparable spots");
    }

  const int rows = img.rows, cols = img.cols;
  ModelFn model = [rows, cols](const Eigen::VectorXd& p, Eigen::VectorXd& f) {
    f.resize(static_cast<Eigen::Index>(rows) * cols);
    const double inv = 1.0 / (2.0 * p[3] * p[3]);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double dx = c - p[1], dy = r - p[2];
        f[static_cast<Eigen::Index>(r) * cols + c] = p[4] + p[0] * std::exp(-(dx * dx + dy * dy) * inv);
      }
  };
  Eigen::VectorXd data = Eigen::Map<const Eigen::VectorXd>(img.pixels.data(), static_cast<Eigen::Index>(img.pixels.size()));
  Eigen::VectorXd start(5);
  start << peak, x0, y0, s0, bg0;
  FitOptions opt;
  opt.lower = Eigen::VectorXd::Constant(5, -std::numeric_limits<double>::infinity());
  opt.lower[0] = 0.0;
  opt.lower[3] = 0.05;
  opt.scale.resize(5);
  opt.scale << peak, s0, s0, s0, std::max(noise, 1.0);
  FitResult fit = levenberg_marquardt(model, data, start, opt);
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "spot fit did not converge (" << fit.message << "); residual norm " << fit.residual_norm;
    throw NumericalError(msg.str());
  }
  const double pitch = img.pixel_pitch_nm;
  out.amplitude = fit.params[0];
  out.x_nm = fit.params[1] * pitch;
  out.y_nm = fit.params[2] * pitch;
  out.sigma_nm = std::abs(fit.params[3]) * pitch;
  out.background = fit.params[4];
  out.uncertainty_nm = std::sqrt(0.5 * (std::max(fit.covariance(1, 1), 0.0) + std::max(fit.covariance(2, 2), 0.0))) * pitch;
  if (fit.params[1] < 0 || fit.params[1] > cols - 1 || fit.params[2] < 0 || fit.params[2] > rows - 1)
    out.warnings.push_back("fitted centre lies outside the frame");
  out.fit = std::move(fit);
  return out;
}

}  // namespace spsim::estimators
