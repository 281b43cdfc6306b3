#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spsim/kernels/backend.hpp"

namespace spsim::kernels {

enum class Channel : std::uint8_t { H = 0, V = 1, background = 2, laser = 3 };

const char* channel_name(Channel c);

struct Photon {
  std::uint64_t pulse;
  Channel channel;
  double time_ps;  // emission time relative to the start of its pulse period
};

// Tabulated emission-time distribution of one channel.
struct EmissionTable {
  double probability = 0.0;   // photons per pulse in this channel
  std::vector<double> times;  // ascending grid
  std::vector<double> cdf;    // normalized cumulative distribution on `times`, cdf.back() == 1
};

// Per-pulse emission model: at most one emitter photon, split over H/V/background,
// plus Poissonian laser leakage photons around the pulse centre.
struct PulseEmissionModel {
  std::array<EmissionTable, 3> emitter;  // indexed by Channel::H, V, background
  double leakage_mean = 0.0;
  double leakage_time_ps = 0.0;
  double leakage_sigma_ps = 0.0;

  void validate() const;
};

// Pulses are processed in fixed-size chunks, each with its own seeded engine, so the
// output depends only on (model, n_pulses, seed) and not on the backend or thread count.
inline constexpr std::uint64_t kSamplingChunk = 8192;

std::vector<Photon> sample_photons_serial(const PulseEmissionModel& model, std::uint64_t n_pulses, std::uint64_t seed);
std::vector<Photon> sample_photons_openmp(const PulseEmissionModel& model, std::uint64_t n_pulses, std::uint64_t seed);

inline std::vector<Photon> sample_photons(Backend backend, const PulseEmissionModel& model, std::uint64_t n_pulses,
                                          std::uint64_t seed) {
  return backend == Backend::openmp ? sample_photons_openmp(model, n_pulses, seed)
                                    : sample_photons_serial(model, n_pulses, seed);
}

}  // namespace spsim::kernels
