#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spsim/dynamics/generator.hpp"
#include "spsim/dynamics/integrator.hpp"
#include "spsim/kernels/photon_sampling.hpp"

namespace spsim::dynamics {

struct EvolveOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double dt_out_ps = 0.5;
  bool keep_states = false;
  bool check_positivity = true;
  kernels::Backend backend = kernels::Backend::serial;
};

struct EmissionTotals {
  double H = 0.0;
  double V = 0.0;
  double background = 0.0;

  double total() const { return H + V + background; }
};

struct EvolutionResult {
  int dim = 0;
  std::vector<double> times;  // ps, uniform grid starting at 0
  std::vector<double> pop_e;
  std::vector<double> n_H;
  std::vector<double> n_V;
  std::vector<cplx> beta;  // displaced field of the driven mode
  std::vector<DenseOp> states;  // only with keep_states
  // Emitted photons per channel, integrated as kappa (or gamma0) x occupation.
  EmissionTotals emitted;
  double max_trace_deviation = 0.0;
  double max_hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;
  OdeStats stats;
  std::vector<std::string> warnings;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  // Instantaneous photon flux (1/ps) of a channel on the output grid.
  std::vector<double> flux(kernels::Channel channel, const CoupledSystem& sys) const;
  // CSV columns: time_ps,pop_e,n_H,n_V
  void write_csv(std::ostream& os) const;
};

// Peak cavity drive amplitude (1/ps) giving the requested adiabatic pulse area.
double drive_amplitude(const CoupledSystem& sys, const PulseSpec& pulse);

// Integrates the master equation from rho0 on [0, t_final]. Without a pulse the
// system evolves freely (use excited_state() for instantaneous excitation).
EvolutionResult evolve(const Generator& gen, const DenseOp& rho0, const std::optional<PulseSpec>& pulse,
                       double t_final_ps, const EvolveOptions& options = {});

// One Rabi-scan point per pulse area, all starting from the ground state.
struct RabiPoint {
  double area_rad;
  double emitted_total;
  double emitted_H;
};

std::vector<RabiPoint> rabi_scan(const Generator& gen, const PulseSpec& pulse_template,
                                 const std::vector<double>& area_grid, double t_final_ps,
                                 const EvolveOptions& options = {});

// Pulse area maximizing total emission (golden-section search around pi).
double calibrate_pi_area(const Generator& gen, const PulseSpec& pulse_template, double t_final_ps,
                         const EvolveOptions& options = {});

struct DecayFit {
  double lifetime_ps;
  double rate_per_ps;
  double rms_log_residual;
  std::size_t points;
};

// Log-linear fit to the excited population after excitation. Without a pulse the
// emitter starts excited. Throws NumericalError if the decay is not exponential.
DecayFit decay_lifetime(const Generator& gen, const std::optional<PulseSpec>& pulse, const EvolveOptions& options = {});

// Free-evolution horizon long enough for ~n_lifetimes of the slowest decay.
double default_horizon_ps(const CoupledSystem& sys, double n_lifetimes = 10.0);

}  // namespace spsim::dynamics
