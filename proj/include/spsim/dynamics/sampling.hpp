#pragma once

#include <cstdint>
#include <optional>

#include "spsim/dynamics/evolution.hpp"
#include "spsim/kernels/photon_sampling.hpp"

namespace spsim::dynamics {

struct PhotonRecords {
  std::vector<kernels::Photon> photons;  // ordered by pulse
  std::uint64_t n_pulses = 0;
  double rep_period_ps = 0.0;
};

// Per-pulse emission model from one evolution: channel probabilities are the
// integrated emission per channel, emission times follow the channel flux, and
// laser leakage is Poissonian with mean leakage_prob, centred on the pulse.
kernels::PulseEmissionModel emission_model(const EvolutionResult& ev, const CoupledSystem& sys,
                                           const std::optional<PulseSpec>& pulse, double leakage_prob);

PhotonRecords sample_photon_records(const EvolutionResult& ev, const CoupledSystem& sys,
                                    const std::optional<PulseSpec>& pulse, std::uint64_t n_pulses,
                                    std::uint64_t seed, double leakage_prob,
                                    kernels::Backend backend = kernels::Backend::serial);

// Leakage mean giving a target g2(0) when detection collects signal photons with
// per-pulse probability p_signal plus Poissonian leakage:
//   g2 = (2 p mu + mu^2) / (p + mu)^2.
double leakage_for_g2(double target_g2, double p_signal);

}  // namespace spsim::dynamics
