#pragma once

// Reference calculations used as test oracles. They share no code with the library.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// Resonantly driven two-level emitter (Gaussian Rabi envelope of the given area)
// with radiative decay gamma and pure dephasing gamma_star, integrated with
// fixed-step RK4 on the 2x2 density matrix. Returns photons emitted per pulse.
inline double tls_emission(double area, double fwhm_ps, double gamma, double gamma_star, double t_final,
                           double dt = 0.002) {
  using M = Eigen::Matrix2cd;
  const double sigma = fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const double t0 = 4.0 * sigma + 1.0;
  const double pi = 3.14159265358979323846;
  auto rhs = [&](double t, const M& rho) {
    const double omega = area * std::exp(-0.5 * std::pow((t - t0) / sigma, 2)) / (sigma * std::sqrt(2 * pi));
    M h;
    h << 0.0, omega / 2.0, omega / 2.0, 0.0;  // basis (e, g)
    const std::complex<double> i{0.0, 1.0};
    M d = -i * (h * rho - rho * h);
    d(0, 0) += -gamma * rho(0, 0);
    d(1, 1) += gamma * rho(0, 0);
    d(0, 1) += -(gamma / 2.0 + gamma_star) * rho(0, 1);
    d(1, 0) += -(gamma / 2.0 + gamma_star) * rho(1, 0);
    return d;
  };
  M rho = M::Zero();
  rho(1, 1) = 1.0;
  double emitted = 0.0;
  const auto steps = static_cast<long>(std::ceil(t_final / dt));
  for (long k = 0; k < steps; ++k) {
    const double t = k * dt;
    const M k1 = rhs(t, rho);
    const M k2 = rhs(t + dt / 2, rho + dt / 2 * k1);
    const M k3 = rhs(t + dt / 2, rho + dt / 2 * k2);
    const M k4 = rhs(t + dt, rho + dt * k3);
    const double pe0 = rho(0, 0).real();
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    emitted += gamma * 0.5 * (pe0 + rho(0, 0).real()) * dt;
  }
  return emitted;
}

// Leakage mean that makes (2 p mu + mu^2) / (p + mu)^2 equal g2, by bisection.
inline double leakage_for_g2_bisect(double g2, double p) {
  double lo = 0.0, hi = 10.0 * p + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mu = 0.5 * (lo + hi);
    const double v = (2 * p * mu + mu * mu) / ((p + mu) * (p + mu));
    (v < g2 ? lo : hi) = mu;
  }
  return 0.5 * (lo + hi);
}

struct MzResult {
  double visibility_raw;
  double g2;
};

// Brute-force unbalanced Mach-Zehnder two-photon experiment, one period of delay.
// Every pulse carries an emitter photon with probability p plus Poissonian laser
// photons of mean mu. The first splitter sends each photon to the short or long
// arm with equal probability; the second has reflectance r. Two emitter photons
// meeting at the second splitter are indistinguishable with probability `overlap`;
// such a pair leaves through different ports with probability (R - T)^2 and
// otherwise through the same port. Zero-delay and far side-peak coincidences
// are counted over all detector pairs; g2 comes from a separate 50:50 HBT run on
// the same source.
inline MzResult mach_zehnder(double p, double mu, double overlap, double r, std::uint64_t pulses,
                             std::uint64_t seed, int side_peaks = 10) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::poisson_distribution<int> leak(mu > 0 ? mu : 1.0);
  struct Slot {
    int d1 = 0, d2 = 0;
  };
  auto run = [&](double ov, bool hbt) {
    std::vector<Slot> slots(pulses + 1);
    std::vector<int> pending_long_emitter(pulses + 1, 0), pending_long_laser(pulses + 1, 0);
    for (std::uint64_t s = 0; s < pulses; ++s) {
      const bool emitter = u(rng) < p;
      const int laser = mu > 0 ? leak(rng) : 0;
      if (hbt) {
        const int n = (emitter ? 1 : 0) + laser;
        for (int k = 0; k < n; ++k) (u(rng) < 0.5 ? slots[s].d1 : slots[s].d2)++;
        continue;
      }
      int short_emitter = 0, short_laser = 0;
      if (emitter) (u(rng) < 0.5 ? short_emitter : pending_long_emitter[s + 1])++;
      for (int k = 0; k < laser; ++k) (u(rng) < 0.5 ? short_laser : pending_long_laser[s + 1])++;
      // Port A: short arm of this pulse. Port B: long arm of the previous pulse.
      int a_e = short_emitter, b_e = pending_long_emitter[s];
      if (a_e > 0 && b_e > 0 && u(rng) < ov) {
        --a_e;
        --b_e;
        if (u(rng) < (2.0 * r - 1.0) * (2.0 * r - 1.0)) {
          ++slots[s].d1;
          ++slots[s].d2;
        } else {
          (u(rng) < 0.5 ? slots[s].d1 : slots[s].d2) += 2;
        }
      }
      for (int k = 0; k < a_e + short_laser; ++k) (u(rng) < r ? slots[s].d1 : slots[s].d2)++;
      for (int k = 0; k < b_e + pending_long_laser[s]; ++k) (u(rng) < 1.0 - r ? slots[s].d1 : slots[s].d2)++;
    }
    double center = 0.0, side = 0.0;
    int side_n = 0;
    for (std::uint64_t s = 0; s < pulses; ++s) center += double(slots[s].d1) * slots[s].d2;
    for (int k = 2; k <= side_peaks; ++k) {
      for (int sign : {-1, 1}) {
        double a = 0.0;
        for (std::uint64_t s = 0; s < pulses; ++s) {
          const long j = static_cast<long>(s) + sign * k;
          if (j < 0 || j >= static_cast<long>(pulses)) continue;
          a += double(slots[s].d1) * slots[static_cast<std::size_t>(j)].d2;
        }
        side += a;
        ++side_n;
      }
    }
    return center / (side / side_n);
  };
  MzResult res;
  const double par = run(overlap, false);
  const double cross = run(0.0, false);
  res.visibility_raw = 1.0 - par / cross;
  res.g2 = run(0.0, true);
  return res;
}

}  // namespace oracle
