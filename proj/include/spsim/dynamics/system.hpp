#pragma once

#include <string>
#include <vector>

#include "spsim/model.hpp"

namespace spsim::dynamics {

// Fock truncation of the two cavity modes. Basis ordering is
// |emitter> (g=0, e=1) (x) |n_H> (x) |n_V>, emitter index slowest.
struct HilbertConfig {
  int n_max_H = 2;
  int n_max_V = 2;

  static constexpr int kMaxDimension = 256;

  int dim() const { return 2 * (n_max_H + 1) * (n_max_V + 1); }
  void validate() const;
};

// Emitter coupled to two orthogonally polarized lossy modes. Rotating frame at
// the emitter frequency; the H mode is resonant, the V mode detuned by delta_V.
// All rates are angular and in 1/ps.
struct CoupledSystem {
  double g_H = 0.0;
  double g_V = 0.0;
  double kappa_H = 1.0;  // energy decay rates (FWHM in angular units)
  double kappa_V = 1.0;
  double delta_V = 0.0;
  double gamma0 = 0.0;      // background (leaky-mode) decay
  double gamma_star = 0.0;  // pure dephasing

  void validate() const;
  // kappa >= 50 g on every coupled mode: regime where adiabatic elimination is trusted.
  bool is_bad_cavity() const;
  // Overdamped single-excitation dynamics (no vacuum Rabi oscillation).
  bool is_overdamped() const;
  double gamma_H_adiabatic() const;
  double gamma_V_adiabatic() const;
  double total_rate_adiabatic() const { return gamma_H_adiabatic() + gamma_V_adiabatic() + gamma0; }
};

enum class Polarization { H, V };

// Gaussian drive pulse. The area is the emitter Rabi angle in the adiabatic
// cavity-response limit; the exact pi pulse is found by calibrate_pi_area().
struct PulseSpec {
  double fwhm_ps = 2.0;
  double area_rad = 3.141592653589793;
  double detuning_per_ps = 0.0;  // laser carrier relative to the emitter
  Polarization polarization = Polarization::V;
  double rep_rate_mhz = 76.0;
  double center_ps = 0.0;  // <= 0 selects 2.5 FWHM

  void validate() const;
  double center() const { return center_ps > 0 ? center_ps : 2.5 * fwhm_ps; }
  double sigma() const;
  double rep_period_ps() const { return 1e6 / rep_rate_mhz; }
  // Non-empty when the pulse is long compared to the emitter lifetime.
  std::vector<std::string> warnings(double gamma_total_per_ps) const;
};

// Bad-cavity system with equal couplings: kappa = kappa_over_g * g on both modes and
// delta_V = ratio_r * kappa.
CoupledSystem bad_cavity_system(double g, double kappa_over_g, double ratio_r, double gamma0,
                                double gamma_star = 0.0);

// Slowest single-excitation population decay rate (1/ps) from the non-Hermitian
// effective Hamiltonian, ignoring pure dephasing.
double single_excitation_decay_rate(const CoupledSystem& sys);

// Chooses the common coupling g so that the total emitter decay rate equals
// purcell_measured / tau_bulk, i.e. the measured lifetime shortening. Cavity
// linewidths and splitting come from the CavitySpec.
CoupledSystem system_for_measured_purcell(const model::CavitySpec& cavity, const model::EmitterSpec& emitter,
                                          double purcell_measured);

}  // namespace spsim::dynamics
