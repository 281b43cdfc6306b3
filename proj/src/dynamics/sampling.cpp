#include "spsim/dynamics/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "spsim/errors.hpp"

namespace spsim::dynamics {

namespace {

kernels::EmissionTable table_from_flux(const std::vector<double>& times, const std::vector<double>& flux,
                                       double probability) {
  kernels::EmissionTable t;
  if (!(probability > 0)) return t;
  t.times = times;
  t.cdf.assign(times.size(), 0.0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double seg = 0.5 * (std::max(flux[i], 0.0) + std::max(flux[i - 1], 0.0)) * (times[i] - times[i - 1]);
    t.cdf[i] = t.cdf[i - 1] + seg;
  }
  const double norm = t.cdf.back();
  if (!(norm > 0)) return {};
  for (double& c : t.cdf) c /= norm;
  t.cdf.back() = 1.0;
  t.probability = probability;
  return t;
}

}  // namespace

kernels::PulseEmissionModel emission_model(const EvolutionResult& ev, const CoupledSystem& sys,
                                           const std::optional<PulseSpec>& pulse, double leakage_prob) {
  require(std::isfinite(leakage_prob) && leakage_prob >= 0 && leakage_prob <= 1,
          "leakage probability must lie in [0, 1]");
  require(ev.times.size() >= 2, "evolution has no time grid");
  double p[3] = {std::max(ev.emitted.H, 0.0), std::max(ev.emitted.V, 0.0), std::max(ev.emitted.background, 0.0)};
  const double total = p[0] + p[1] + p[2];
  // Re-excitation during long pulses can push the integral marginally above one.
  if (total > 1.0) {
    for (double& x : p) x /= total;
  }
  kernels::PulseEmissionModel m;
  m.emitter[0] = table_from_flux(ev.times, ev.flux(kernels::Channel::H, sys), p[0]);
  m.emitter[1] = table_from_flux(ev.times, ev.flux(kernels::Channel::V, sys), p[1]);
  m.emitter[2] = table_from_flux(ev.times, ev.flux(kernels::Channel::background, sys), p[2]);
  m.leakage_mean = leakage_prob;
  if (pulse) {
    m.leakage_time_ps = pulse->center();
    m.leakage_sigma_ps = pulse->sigma();
  }
  m.validate();
  return m;
}

PhotonRecords sample_photon_records(const EvolutionResult& ev, const CoupledSystem& sys,
                                    const std::optional<PulseSpec>& pulse, std::uint64_t n_pulses,
                                    std::uint64_t seed, double leakage_prob, kernels::Backend backend) {
  require(n_pulses >= 1, "need at least one pulse");
  const auto model = emission_model(ev, sys, pulse, leakage_prob);
  PhotonRecords out;
  out.photons = kernels::sample_photons(backend, model, n_pulses, seed);
  out.n_pulses = n_pulses;
  out.rep_period_ps = pulse ? pulse->rep_period_ps() : PulseSpec{}.rep_period_ps();
  return out;
}

double leakage_for_g2(double target_g2, double p_signal) {
  require(target_g2 >= 0 && target_g2 < 1, "target g2 must lie in [0, 1)");
  require(p_signal > 0 && p_signal <= 1, "signal probability must lie in (0, 1]");
  return p_signal * (1.0 / std::sqrt(1.0 - target_g2) - 1.0);
}

}  // namespace spsim::dynamics
