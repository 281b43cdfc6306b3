#include "spsim/kernels/photon_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "spsim/errors.hpp"

namespace spsim::kernels {

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::H: return "H";
    case Channel::V: return "V";
    case Channel::background: return "background";
    case Channel::laser: return "laser";
  }
  return "?";
}

void PulseEmissionModel::validate() const {
  double total = 0.0;
  for (const auto& table : emitter) {
    require(table.probability >= 0, "channel probability must be non-negative");
    total += table.probability;
    if (table.probability > 0) {
      require(table.times.size() >= 2 && table.times.size() == table.cdf.size(), "emission table is malformed");
      require(std::abs(table.cdf.back() - 1.0) < 1e-9, "emission CDF must end at 1");
    }
  }
  require(total <= 1.0 + 1e-9, "emitter photon probability per pulse exceeds 1");
  require(leakage_mean >= 0, "leakage mean must be non-negative");
  require(leakage_sigma_ps >= 0, "leakage jitter must be non-negative");
}

namespace {

double sample_time(const EmissionTable& table, double u) {
  const auto it = std::lower_bound(table.cdf.begin(), table.cdf.end(), u);
  if (it == table.cdf.begin()) return table.times.front();
  if (it == table.cdf.end()) return table.times.back();
  const auto hi = static_cast<std::size_t>(it - table.cdf.begin());
  const std::size_t lo = hi - 1;
  const double span = table.cdf[hi] - table.cdf[lo];
  const double frac = span > 0 ? (u - table.cdf[lo]) / span : 0.0;
  return table.times[lo] + frac * (table.times[hi] - table.times[lo]);
}

std::vector<Photon> sample_chunk(const PulseEmissionModel& model, std::uint64_t first, std::uint64_t last,
                                 std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::poisson_distribution<int> leakage(model.leakage_mean > 0 ? model.leakage_mean : 1.0);
  std::normal_distribution<double> jitter(model.leakage_time_ps, model.leakage_sigma_ps > 0 ? model.leakage_sigma_ps : 1.0);

  const double p_H = model.emitter[0].probability;
  const double p_V = model.emitter[1].probability;
  const double p_bg = model.emitter[2].probability;

  std::vector<Photon> out;
  out.reserve(static_cast<std::size_t>((last - first) * 2));
  for (std::uint64_t pulse = first; pulse < last; ++pulse) {
    const double u = uniform(rng);
    const double u_time = uniform(rng);
    if (u < p_H) {
      out.push_back({pulse, Channel::H, sample_time(model.emitter[0], u_time)});
    } else if (u < p_H + p_V) {
      out.push_back({pulse, Channel::V, sample_time(model.emitter[1], u_time)});
    } else if (u < p_H + p_V + p_bg) {
      out.push_back({pulse, Channel::background, sample_time(model.emitter[2], u_time)});
    }
    if (model.leakage_mean > 0) {
      const int n = leakage(rng);
      for (int k = 0; k < n; ++k) {
        const double t = model.leakage_sigma_ps > 0 ? jitter(rng) : model.leakage_time_ps;
        out.push_back({pulse, Channel::laser, t});
      }
    }
  }
  return out;
}

std::uint64_t chunk_count(std::uint64_t n_pulses) { return (n_pulses + kSamplingChunk - 1) / kSamplingChunk; }

}  // namespace

std::vector<Photon> sample_photons_serial(const PulseEmissionModel& model, std::uint64_t n_pulses, std::uint64_t seed) {
  model.validate();
  std::vector<Photon> all;
  for (std::uint64_t c = 0; c < chunk_count(n_pulses); ++c) {
    auto part = sample_chunk(model, c * kSamplingChunk, std::min(n_pulses, (c + 1) * kSamplingChunk), seed, c);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::vector<Photon> sample_photons_openmp(const PulseEmissionModel& model, std::uint64_t n_pulses, std::uint64_t seed) {
  model.validate();
  const auto chunks = static_cast<long>(chunk_count(n_pulses));
  std::vector<std::vector<Photon>> parts(static_cast<std::size_t>(chunks));
#pragma omp parallel for schedule(dynamic)
  for (long c = 0; c < chunks; ++c) {
    const auto uc = static_cast<std::uint64_t>(c);
    parts[uc] = sample_chunk(model, uc * kSamplingChunk, std::min(n_pulses, (uc + 1) * kSamplingChunk), seed, uc);
  }
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<Photon> all;
  all.reserve(total);
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

}  // namespace spsim::kernels
