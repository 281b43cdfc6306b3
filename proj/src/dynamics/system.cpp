#include "spsim/dynamics/system.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::dynamics {

void HilbertConfig::validate() const {
  require(n_max_H >= 1 && n_max_V >= 1, "Fock truncation must be at least 1 per mode");
  require(dim() <= kMaxDimension, "Hilbert dimension " + std::to_string(dim()) + " exceeds the limit of " +
                                      std::to_string(kMaxDimension));
}

void CoupledSystem::validate() const {
  require(g_H >= 0 && g_V >= 0, "couplings must be non-negative");
  require(kappa_H > 0 && kappa_V > 0, "cavity decay rates must be positive");
  require(gamma0 >= 0 && gamma_star >= 0, "emitter rates must be non-negative");
  require(std::isfinite(delta_V), "detuning must be finite");
}

bool CoupledSystem::is_bad_cavity() const {
  return kappa_H >= 50.0 * g_H && kappa_V >= 50.0 * g_V;
}

bool CoupledSystem::is_overdamped() const {
  return 4.0 * g_H < kappa_H && 4.0 * g_V < std::hypot(kappa_V, 2.0 * delta_V);
}

double CoupledSystem::gamma_H_adiabatic() const { return 4.0 * g_H * g_H / kappa_H; }

double CoupledSystem::gamma_V_adiabatic() const {
  return 4.0 * g_V * g_V * kappa_V / (kappa_V * kappa_V + 4.0 * delta_V * delta_V);
}

void PulseSpec::validate() const {
  require(fwhm_ps > 0, "pulse FWHM must be positive");
  require(area_rad >= 0, "pulse area must be non-negative");
  require(rep_rate_mhz > 0, "repetition rate must be positive");
  require(std::isfinite(detuning_per_ps), "pulse detuning must be finite");
}

double PulseSpec::sigma() const { return units::gaussian_sigma_from_fwhm(fwhm_ps); }

std::vector<std::string> PulseSpec::warnings(double gamma_total_per_ps) const {
  std::vector<std::string> out;
  if (fwhm_ps * gamma_total_per_ps > 0.5) {
    out.push_back("pulse FWHM exceeds half the emitter lifetime; emission time jitter and re-excitation expected");
  }
  return out;
}

CoupledSystem bad_cavity_system(double g, double kappa_over_g, double ratio_r, double gamma0, double gamma_star) {
  require(g > 0 && kappa_over_g > 0, "coupling and kappa/g must be positive");
  CoupledSystem sys;
  sys.g_H = sys.g_V = g;
  sys.kappa_H = sys.kappa_V = kappa_over_g * g;
  sys.delta_V = ratio_r * sys.kappa_V;
  sys.gamma0 = gamma0;
  sys.gamma_star = gamma_star;
  sys.validate();
  return sys;
}

double single_excitation_decay_rate(const CoupledSystem& sys) {
  sys.validate();
  using cd = std::complex<double>;
  const cd i{0.0, 1.0};
  Eigen::Matrix3cd m;
  m << -i * sys.gamma0 / 2.0, sys.g_H, sys.g_V,
       sys.g_H, -i * sys.kappa_H / 2.0, 0.0,
       sys.g_V, 0.0, sys.delta_V - i * sys.kappa_V / 2.0;
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(m);
  double slowest = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) slowest = std::max(slowest, solver.eigenvalues()[k].imag());
  return -2.0 * slowest;
}

CoupledSystem system_for_measured_purcell(const model::CavitySpec& cavity, const model::EmitterSpec& emitter,
                                          double purcell_measured) {
  cavity.validate();
  emitter.validate();
  require(purcell_measured > 1.0, "measured Purcell factor must exceed 1");

  CoupledSystem sys;
  sys.kappa_H = units::angular_per_ps(cavity.linewidth_H_ghz);
  sys.kappa_V = units::angular_per_ps(cavity.linewidth_V_ghz);
  sys.delta_V = units::angular_per_ps(cavity.splitting_ghz());
  sys.gamma0 = 1.0 / emitter.tau_bulk_ps;
  sys.gamma_star = units::rate_per_ps(emitter.gamma_star_ghz);

  const double target = purcell_measured * sys.gamma0;
  auto rate_at = [&](double g) {
    CoupledSystem trial = sys;
    trial.g_H = trial.g_V = g;
    return single_excitation_decay_rate(trial);
  };
  // The slowest rate grows monotonically with g up to the exceptional point g = kappa_H / 4.
  double lo = 0.0;
  double hi = 0.25 * sys.kappa_H * (1.0 - 1e-9);
  if (rate_at(hi) < target) {
    throw ValidationError("measured Purcell factor is not reachable in the overdamped (weak-coupling) regime");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rate_at(mid) < target ? lo : hi) = mid;
  }
  sys.g_H = sys.g_V = 0.5 * (lo + hi);
  return sys;
}

}  // namespace spsim::dynamics
