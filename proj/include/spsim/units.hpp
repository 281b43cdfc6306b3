#pragma once

#include <numbers>

// Unit conventions used across the library:
//   wavelengths in nm, times in ps,
//   linewidths and splittings as ordinary frequencies in GHz,
//   decay rates quoted in GHz mean 1e9 events per second (1/ns),
//   master-equation rates (g, kappa, detuning) in angular units of 1/ps.
namespace spsim::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// c expressed in nm * GHz; exact from c = 299 792 458 m/s.
inline constexpr double c_nm_ghz = 299'792'458.0;

inline constexpr double frequency_ghz(double lambda_nm) { return c_nm_ghz / lambda_nm; }

inline constexpr double wavelength_nm(double frequency_ghz) { return c_nm_ghz / frequency_ghz; }

// Ordinary frequency (GHz) -> angular frequency (rad/ps).
inline constexpr double angular_per_ps(double frequency_ghz) { return two_pi * frequency_ghz * 1e-3; }

inline constexpr double frequency_ghz_from_angular(double omega_per_ps) { return omega_per_ps * 1e3 / two_pi; }

// Decay rate in 1/ns ("GHz") -> 1/ps.
inline constexpr double rate_per_ps(double rate_ghz) { return rate_ghz * 1e-3; }

inline constexpr double rate_ghz(double rate_per_ps) { return rate_per_ps * 1e3; }

inline constexpr double gaussian_sigma_from_fwhm(double fwhm) { return fwhm / 2.3548200450309493; }

}  // namespace spsim::units
