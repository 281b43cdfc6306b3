#pragma once

#include <optional>

#include "spsim/dynamics/evolution.hpp"

namespace spsim::dynamics {

// First-order emitter correlation G1(t, tau) = <s+(t + tau) s-(t)> by quantum
// regression. Rows are start times t_i = times[i * t_stride]; columns are delays
// tau_j = j * dt. Entries past the evolution horizon are zero.
struct G1Grid {
  std::vector<double> t;
  std::vector<double> tau;
  Eigen::MatrixXcd values;
};

G1Grid g1_two_time(const Generator& gen, const EvolutionResult& evolution, const std::optional<PulseSpec>& pulse,
                   std::size_t t_stride = 1, const EvolveOptions& options = {});

struct Indistinguishability {
  double value;
  double emitted;  // total photons emitted over the horizon
  double emitted_population;  // integral of <s+ s-> dt (ps)
  std::vector<std::string> warnings;
};

// Two-photon overlap 2 int int_{tau >= 0} |G1|^2 / (int <s+s-> dt)^2 for a
// single excitation cycle. Without a pulse the emitter starts excited.
Indistinguishability indistinguishability(const Generator& gen, const std::optional<PulseSpec>& pulse,
                                          double t_final_ps, const EvolveOptions& options = {});

}  // namespace spsim::dynamics
