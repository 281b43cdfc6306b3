#include "spsim/estimators/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "spsim/errors.hpp"

namespace spsim::estimators {

void CoincidenceHistogram::validate() const {
  require(bin_ps > 0 && std::isfinite(bin_ps), "histogram bin width must be positive");
  require(rep_period_ps > 0 && std::isfinite(rep_period_ps), "repetition period must be positive");
  const double ratio = rep_period_ps / bin_ps;
  require(std::abs(ratio - std::round(ratio)) < 1e-6 * ratio && std::round(ratio) >= 1,
          "repetition period must be an integer multiple of the bin width");
  require(half_bins >= 0 && counts.size() == static_cast<std::size_t>(2 * half_bins + 1),
          "histogram must be symmetric about zero delay");
  for (double c : counts) require(c >= 0 && std::isfinite(c), "histogram counts must be non-negative");
}

int CoincidenceHistogram::bins_per_period() const { return static_cast<int>(std::lround(rep_period_ps / bin_ps)); }

double CoincidenceHistogram::total() const { return std::accumulate(counts.begin(), counts.end(), 0.0); }

PeakAreas peak_areas(const CoincidenceHistogram& h) {
  h.validate();
  const int n = h.bins_per_period();
  // Window [kT - T/2, kT + T/2) in bin offsets q relative to the peak.
  const int q_lo = -(n / 2);
  const int q_hi = (n + 1) / 2 - 1;
  PeakAreas out;
  out.max_order = 0;
  while (true) {
    const int k = out.max_order + 1;
    if (k * n + q_hi > h.half_bins || -k * n + q_lo < -h.half_bins) break;
    ++out.max_order;
  }
  require(q_hi <= h.half_bins && q_lo >= -h.half_bins, "histogram does not cover the zero-delay window");
  for (int k = -out.max_order; k <= out.max_order; ++k) {
    double a = 0.0;
    for (int q = q_lo; q <= q_hi; ++q) a += h.counts[static_cast<std::size_t>(k * n + q + h.half_bins)];
    out.areas.push_back(a);
  }
  return out;
}

namespace {

struct Normalized {
  double center;
  double side_mean;
  double side_total;
  int per_side;
};

Normalized normalize_center(const CoincidenceHistogram& h) {
  require(h.total() > 0, "histogram has no counts");
  const PeakAreas p = peak_areas(h);
  const int per_side = p.max_order - 1;
  if (per_side < 5) {
    throw ValidationError("histogram needs at least 5 side peaks per side beyond the nearest; found " +
                          std::to_string(std::max(per_side, 0)));
  }
  double side = 0.0;
  for (int k = 2; k <= p.max_order; ++k) side += p.at(k) + p.at(-k);
  const double mean = side / (2.0 * per_side);
  require(mean > 0, "side peaks are empty");
  return {p.at(0), mean, side, per_side};
}

}  // namespace

G2Estimate g2_from_histogram(const CoincidenceHistogram& h) {
  const Normalized n = normalize_center(h);
  G2Estimate out;
  out.center_area = n.center;
  out.side_mean = n.side_mean;
  out.side_peaks_per_side = n.per_side;
  out.value = n.center / n.side_mean;
  // Poisson errors on both areas; an empty centre still carries one count of uncertainty.
  const double rel_side = 1.0 / n.side_total;
  out.uncertainty = n.center > 0 ? out.value * std::sqrt(1.0 / n.center + rel_side) : 1.0 / n.side_mean;
  return out;
}

HomRaw hom_visibility_raw(const CoincidenceHistogram& parallel, const CoincidenceHistogram& cross) {
  require(std::abs(parallel.bin_ps - cross.bin_ps) <= 1e-9 * parallel.bin_ps &&
              std::abs(parallel.rep_period_ps - cross.rep_period_ps) <= 1e-9 * parallel.rep_period_ps,
          "parallel and cross histograms must share binning");
  const Normalized p = normalize_center(parallel);
  const Normalized c = normalize_center(cross);
  require(c.center > 0, "cross-polarized zero-delay area is zero");
  HomRaw out;
  out.parallel_normalized = p.center / p.side_mean;
  out.cross_normalized = c.center / c.side_mean;
  const double ratio = out.parallel_normalized / out.cross_normalized;
  out.visibility = 1.0 - ratio;
  const double rel2 = (p.center > 0 ? 1.0 / p.center : 0.0) + 1.0 / p.side_total + 1.0 / c.center + 1.0 / c.side_total;
  out.uncertainty = (p.center > 0 ? ratio : 1.0 / (p.side_mean * out.cross_normalized)) * std::sqrt(rel2);
  return out;
}

HomCorrection hom_corrected(double v_raw, double g2_zero, double reflectance, double c_bg) {
  require(v_raw >= 0 && v_raw <= 1, "raw visibility must lie in [0, 1]");
  require(g2_zero >= 0 && g2_zero < 1, "g2(0) must lie in [0, 1)");
  require(reflectance > 0 && reflectance < 1, "splitter reflectance must lie in (0, 1)");
  require(c_bg >= 0, "background coefficient must be non-negative");
  const double r = reflectance, t = 1.0 - reflectance;
  const double s = r * r + t * t;
  HomCorrection out;
  out.unclamped = (v_raw * s + 2.0 * g2_zero * c_bg) / (2.0 * r * t);
  out.value = std::clamp(out.unclamped, 0.0, 1.0);
  if (out.unclamped > 1.0) {
    out.clamped = true;
    out.warning = "corrected indistinguishability exceeds 1; inputs are inconsistent with the splitter model";
  }
  return out;
}

}  // namespace spsim::estimators
