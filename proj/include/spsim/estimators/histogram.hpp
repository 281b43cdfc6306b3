#pragma once

#include <string>
#include <vector>

namespace spsim::estimators {

// Binned start-stop coincidences. Bin k holds delay (k - half_bins) * bin_ps.
struct CoincidenceHistogram {
  double bin_ps = 0.0;
  double rep_period_ps = 0.0;
  int half_bins = 0;
  std::vector<double> counts;

  void validate() const;
  double delay(std::size_t k) const { return (static_cast<double>(k) - half_bins) * bin_ps; }
  int bins_per_period() const;
  double total() const;
};

// Areas over one-period windows centred on the peaks at delay k * period, for every
// k whose window lies entirely inside the histogram.
struct PeakAreas {
  int max_order = 0;
  std::vector<double> areas;  // index k + max_order

  double at(int k) const { return areas.at(static_cast<std::size_t>(k + max_order)); }
};

PeakAreas peak_areas(const CoincidenceHistogram& h);

struct G2Estimate {
  double value = 0.0;
  double uncertainty = 0.0;
  double center_area = 0.0;
  double side_mean = 0.0;
  int side_peaks_per_side = 0;
};

// Needs at least five side peaks per side beyond the two nearest, which are
// excluded from the baseline.
G2Estimate g2_from_histogram(const CoincidenceHistogram& h);

struct HomRaw {
  double visibility = 0.0;
  double uncertainty = 0.0;
  double parallel_normalized = 0.0;
  double cross_normalized = 0.0;
};

HomRaw hom_visibility_raw(const CoincidenceHistogram& parallel, const CoincidenceHistogram& cross);

// Uncorrelated-background coefficient of the two-photon splitter model, fixed
// by the brute-force Monte Carlo in the test suite.
inline constexpr double kHomBackgroundCoefficient = 0.467;

struct HomCorrection {
  double value = 0.0;
  double unclamped = 0.0;
  bool clamped = false;
  std::string warning;
};

// Inverts A_par/A_cross = [(R^2+T^2) - 2RT I + 2 g2 c_bg] / (R^2+T^2) for I.
HomCorrection hom_corrected(double v_raw, double g2_zero, double reflectance,
                            double c_bg = kHomBackgroundCoefficient);

}  // namespace spsim::estimators
