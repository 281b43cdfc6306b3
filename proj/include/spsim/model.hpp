#pragma once

#include <span>
#include <string>
#include <vector>

// Closed-form design model of an emitter in a birefringent (two-mode) cavity.
//
// The emitter is resonant with the H mode; the V mode sits a splitting
// Delta away. With r = Delta / linewidth the cavity redistributes emission
// between H and V in the ratio 1 + 4 r^2 : 1. All functions here are pure.
namespace spsim::model {

struct CavitySpec {
  double lambda_H_nm = 0.0;
  double lambda_V_nm = 0.0;
  double linewidth_H_ghz = 0.0;  // FWHM, ordinary frequency
  double linewidth_V_ghz = 0.0;
  std::string label_H = "H";
  std::string label_V = "V";

  void validate() const;
  double splitting_ghz() const;
  // Splitting over the V-mode linewidth (the detuned mode sets the suppression).
  double ratio() const;
};

struct EmitterSpec {
  double lambda_nm = 0.0;
  double tau_bulk_ps = 1090.0;
  double gamma_star_ghz = 0.0;  // pure dephasing, 1/ns
  double eta_internal = 1.0;
  double on_fraction = 1.0;

  void validate() const;
};

struct OperatingPoint {
  double purcell_F = 1.0;  // H-mode Purcell factor
  double ratio_r = 0.0;    // splitting / linewidth

  void validate() const;
};

// Decay rates in 1/ps.
struct RateSet {
  double gamma0 = 0.0;
  double gamma_H = 0.0;
  double gamma_V = 0.0;
  double gamma_leak = 0.0;

  double total() const { return gamma_H + gamma_V + gamma_leak; }
  double polarized_efficiency() const { return gamma_H / total(); }
};

double emission_ratio(double ratio_r);

double polarized_extraction_efficiency(const OperatingPoint& op);

// Pump-power multiplier for a pi pulse relative to an isotropic cavity.
double pi_power_factor(double ratio_r);

double purcell_from_lifetimes(double tau_cavity_ps, double tau_bulk_ps);

double degree_of_polarization(double intensity_H, double intensity_V);

double splitting_from_wavelengths(double lambda_1_nm, double lambda_2_nm);

double linewidth_from_q(double lambda_nm, double quality_factor);

// Throws if the emitter is detuned from the H mode by more than one H linewidth.
RateSet effective_rates(const CavitySpec& cavity, const EmitterSpec& emitter, double purcell_F);

// Linear tuning rule for elliptical bullseye gratings: nm of mode shift per
// nm change of central-disk radius (1.14) and grating period (0.25).
double bullseye_mode_shift(double d_radius_nm, double d_period_nm);

struct SweepRow {
  double purcell_F;
  double ratio_r;
  double efficiency;
  double power_factor;
};

// Rows ordered by F (outer, input order) then r (inner, input order).
std::vector<SweepRow> efficiency_sweep(std::span<const double> purcell_values, std::span<const double> ratio_grid);

// Evenly spaced grid [lo, hi] with the given step; hi included when it lands on the grid.
std::vector<double> linear_grid(double lo, double hi, double step);

}  // namespace spsim::model
