// Writes the sample CSV inputs under data/ used by the README examples.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "spsim/estimators/csv_io.hpp"
#include "spsim/estimators/lifetime.hpp"
#include "spsim/estimators/spectrum.hpp"
#include "spsim/model.hpp"
#include "spsim/units.hpp"

using namespace spsim;
using namespace spsim::estimators;

namespace {

double poisson(std::mt19937_64& rng, double mean) {
  return mean > 0 ? static_cast<double>(std::poisson_distribution<long>(mean)(rng)) : 0.0;
}

template <class Writer, class T>
void save(const std::filesystem::path& path, Writer writer, const T& data) {
  std::ofstream out(path);
  writer(out, data);
  std::cout << "wrote " << path.string() << '\n';
}

// Two-sided exponential peaks at every multiple of the period.
CoincidenceHistogram synthetic_histogram(double center_ratio, double side_counts, double tau_ps, std::mt19937_64& rng) {
  CoincidenceHistogram h;
  h.rep_period_ps = 13157.894736842105;  // 76 MHz
  const int n = 400;
  h.bin_ps = h.rep_period_ps / n;
  h.half_bins = 8 * n + n / 2;
  for (int k = -h.half_bins; k <= h.half_bins; ++k) {
    const double t = k * h.bin_ps;
    const int order = static_cast<int>(std::lround(t / h.rep_period_ps));
    const double dt = t - order * h.rep_period_ps;
    const double area = order == 0 ? center_ratio * side_counts : side_counts;
    const double mean = area * h.bin_ps / (2 * tau_ps) * std::exp(-std::abs(dt) / tau_ps) + 0.2;
    h.counts.push_back(poisson(rng, mean));
  }
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(7);

  // Micropillar doublet from the quoted mode wavelengths and quality factors.
  Spectrum spec;
  const double l1 = 896.54, l2 = 897.04;
  const double w1 = l1 / 4075, w2 = l2 / 5016;
  for (int i = 0; i <= 400; ++i) {
    const double x = 895.8 + i * 0.005;
    spec.wavelength_nm.push_back(x);
    spec.intensity.push_back(poisson(rng, lorentzian(x, l1, w1, 3000) + lorentzian(x, l2, w2, 4000) + 50));
  }
  save(dir / "spectrum_doublet.csv", write_spectrum, spec);

  PolarScan scan;
  for (int a = 0; a < 360; a += 10) {
    const double th = a * units::pi / 180.0;
    scan.angle_deg.push_back(a);
    scan.intensity.push_back(poisson(rng, 13.16e4 * std::pow(std::cos(th - 0.2), 2) + 0.54e4));
  }
  save(dir / "polar_scan.csv", write_polar_scan, scan);

  DecayTrace trace;
  trace.irf_fwhm_ps = 20;
  const double sigma = units::gaussian_sigma_from_fwhm(trace.irf_fwhm_ps);
  for (int i = 0; i < 500; ++i) {
    const double t = 1.0 + 2.0 * i;
    trace.time_ps.push_back(t);
    trace.counts.push_back(poisson(rng, 5000 * exp_gaussian(t, 100, 61.0, sigma) + 2));
  }
  save(dir / "decay_trace.csv", write_decay_trace, trace);

  save(dir / "hbt_histogram.csv", write_histogram, synthetic_histogram(0.025, 20000, 61.0, rng));
  save(dir / "hom_parallel.csv", write_histogram, synthetic_histogram(0.0435, 20000, 61.0, rng));
  save(dir / "hom_cross.csv", write_histogram, synthetic_histogram(0.5, 20000, 61.0, rng));

  ImageFrame img;
  img.rows = img.cols = 31;
  img.pixel_pitch_nm = 50;
  for (int r = 0; r < img.rows; ++r)
    for (int c = 0; c < img.cols; ++c) {
      const double dx = c - 15.3, dy = r - 14.6;
      img.pixels.push_back(poisson(rng, 4000 * std::exp(-(dx * dx + dy * dy) / (2 * 2.2 * 2.2)) + 100));
    }
  save(dir / "spot_image.csv", write_image, img);
  return 0;
}
