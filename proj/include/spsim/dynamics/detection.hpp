#pragma once

#include <cstdint>
#include <vector>

#include "spsim/dynamics/sampling.hpp"
#include "spsim/estimators/histogram.hpp"

namespace spsim::dynamics {

struct CoincidenceSetup {
  int bins_per_period = 800;
  int side_peaks = 8;  // histogram spans side_peaks periods either side of zero
  double reflectance = 0.5;  // HBT splitter, or the HOM recombining splitter
  double detection_efficiency = 1.0;
  // Photons passing the polarizer in front of the detectors.
  std::vector<kernels::Channel> detected{kernels::Channel::H, kernels::Channel::laser};

  void validate() const;
};

// Start-stop histogram of a 50:50-style splitter with one detector per output.
estimators::CoincidenceHistogram hbt_histogram(const PhotonRecords& records, const CoincidenceSetup& setup,
                                               std::uint64_t seed,
                                               kernels::Backend backend = kernels::Backend::serial);

struct HomHistograms {
  estimators::CoincidenceHistogram parallel;
  estimators::CoincidenceHistogram cross;
};

// Unbalanced Mach-Zehnder with a one-period delay arm. Consecutive emitter photons
// meeting at the second splitter interfere with probability `overlap` in the
// parallel configuration and never in the cross configuration.
HomHistograms hom_histograms(const PhotonRecords& records, double overlap, const CoincidenceSetup& setup,
                             std::uint64_t seed, kernels::Backend backend = kernels::Backend::serial);

}  // namespace spsim::dynamics
