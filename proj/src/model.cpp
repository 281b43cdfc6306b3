#include "spsim/model.hpp"

#include <cmath>

#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::model {

void CavitySpec::validate() const {
  require(lambda_H_nm > 0 && lambda_V_nm > 0, "cavity wavelengths must be positive");
  require(linewidth_H_ghz > 0 && linewidth_V_ghz > 0, "cavity linewidths must be positive");
}

double CavitySpec::splitting_ghz() const { return splitting_from_wavelengths(lambda_H_nm, lambda_V_nm); }

double CavitySpec::ratio() const { return splitting_ghz() / linewidth_V_ghz; }

void EmitterSpec::validate() const {
  require(lambda_nm > 0, "emitter wavelength must be positive");
  require(tau_bulk_ps > 0, "bulk lifetime must be positive");
  require(gamma_star_ghz >= 0, "pure dephasing rate must be non-negative");
  require(eta_internal >= 0 && eta_internal <= 1, "internal efficiency must lie in [0,1]");
  require(on_fraction >= 0 && on_fraction <= 1, "blinking on-fraction must lie in [0,1]");
}

void OperatingPoint::validate() const {
  require(purcell_F > 0, "Purcell factor must be positive");
  require(ratio_r >= 0, "splitting ratio must be non-negative");
}

double emission_ratio(double ratio_r) {
  require(ratio_r >= 0, "splitting ratio must be non-negative");
  return 1.0 + 4.0 * ratio_r * ratio_r;
}

double polarized_extraction_efficiency(const OperatingPoint& op) {
  op.validate();
  const double F = op.purcell_F;
  // Background (leaky-mode) emission at the bulk rate supplies the "+1".
  return F / (F + F / emission_ratio(op.ratio_r) + 1.0);
}

double pi_power_factor(double ratio_r) {
  require(ratio_r >= 0, "splitting ratio must be non-negative");
  return 1.0 + ratio_r * ratio_r;
}

double purcell_from_lifetimes(double tau_cavity_ps, double tau_bulk_ps) {
  require(tau_cavity_ps > 0 && tau_bulk_ps > 0, "lifetimes must be positive");
  return tau_bulk_ps / tau_cavity_ps;
}

double degree_of_polarization(double intensity_H, double intensity_V) {
  require(intensity_H >= 0 && intensity_V >= 0, "intensities must be non-negative");
  require(intensity_H + intensity_V > 0, "at least one intensity must be positive");
  return (intensity_H - intensity_V) / (intensity_H + intensity_V);
}

double splitting_from_wavelengths(double lambda_1_nm, double lambda_2_nm) {
  require(lambda_1_nm > 0 && lambda_2_nm > 0, "wavelengths must be positive");
  return units::c_nm_ghz * std::abs(lambda_2_nm - lambda_1_nm) / (lambda_1_nm * lambda_2_nm);
}

double linewidth_from_q(double lambda_nm, double quality_factor) {
  require(lambda_nm > 0 && quality_factor > 0, "wavelength and Q must be positive");
  return units::frequency_ghz(lambda_nm) / quality_factor;
}

RateSet effective_rates(const CavitySpec& cavity, const EmitterSpec& emitter, double purcell_F) {
  cavity.validate();
  emitter.validate();
  require(purcell_F > 0, "Purcell factor must be positive");
  const double detuning = splitting_from_wavelengths(emitter.lambda_nm, cavity.lambda_H_nm);
  if (detuning > cavity.linewidth_H_ghz) {
    throw ValidationError("emitter is detuned from the H mode by more than one linewidth; "
                          "the detuned-emitter model is not supported");
  }
  RateSet rates;
  rates.gamma0 = 1.0 / emitter.tau_bulk_ps;
  rates.gamma_H = purcell_F * rates.gamma0;
  rates.gamma_V = rates.gamma_H / emission_ratio(cavity.ratio());
  rates.gamma_leak = rates.gamma0;
  return rates;
}

double bullseye_mode_shift(double d_radius_nm, double d_period_nm) {
  return 1.14 * d_radius_nm + 0.25 * d_period_nm;
}

std::vector<SweepRow> efficiency_sweep(std::span<const double> purcell_values, std::span<const double> ratio_grid) {
  require(!purcell_values.empty(), "Purcell list must not be empty");
  require(!ratio_grid.empty(), "ratio grid must not be empty");
  std::vector<SweepRow> rows;
  rows.reserve(purcell_values.size() * ratio_grid.size());
  for (double F : purcell_values) {
    for (double r : ratio_grid) {
      require(r >= 0, "ratio grid must be non-negative");
      rows.push_back({F, r, polarized_extraction_efficiency({F, r}), pi_power_factor(r)});
    }
  }
  return rows;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  require(step > 0 && hi >= lo, "grid needs step > 0 and hi >= lo");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

}  // namespace spsim::model
