#include "spsim/dynamics/evolution.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "spsim/dynamics/rhs.hpp"
#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::dynamics {

namespace detail {

namespace {

struct DriveMode {
  double g;
  double delta;
  double kappa;
};

DriveMode drive_mode(const CoupledSystem& sys, Polarization p) {
  if (p == Polarization::H) return {sys.g_H, 0.0, sys.kappa_H};
  return {sys.g_V, sys.delta_V, sys.kappa_V};
}

}  // namespace

DrivenRhs::DrivenRhs(const Generator& gen, const std::optional<PulseSpec>& pulse, kernels::Backend backend)
    : gen_(&gen), pulse_(pulse), backend_(backend),
      block_(static_cast<std::size_t>(gen.dim()) * static_cast<std::size_t>(gen.dim())) {
  if (pulse_) {
    pulse_->validate();
    const DriveMode m = drive_mode(gen.system(), pulse_->polarization);
    g_drive_ = m.g;
    field_decay_ = cplx{m.kappa / 2.0, m.delta};
    amplitude_ = drive_amplitude(gen.system(), *pulse_);
  }
}

cplx DrivenRhs::laser(double t) const {
  if (!pulse_ || amplitude_ == 0.0) return {0.0, 0.0};
  const double s = pulse_->sigma();
  const double x = (t - pulse_->center()) / s;
  if (std::abs(x) > 12.0) return {0.0, 0.0};
  return amplitude_ * std::exp(-0.5 * x * x) * std::polar(1.0, -pulse_->detuning_per_ps * t);
}

void DrivenRhs::operator()(double t, std::span<const cplx> y, std::span<cplx> dy) const {
  const cplx beta = y[block_];
  gen_->apply(g_drive_ * beta, y.first(block_), dy.first(block_), backend_);
  dy[block_] = -field_decay_ * beta - cplx{0.0, 1.0} * laser(t);

  const int d = gen_->dim();
  const auto exc = gen_->excited();
  const auto nh = gen_->photons_H();
  const auto nv = gen_->photons_V();
  double fh = 0, fv = 0, fb = 0;
  for (int i = 0; i < d; ++i) {
    const double p = y[static_cast<std::size_t>(i) * (d + 1)].real();
    fh += nh[i] * p;
    fv += nv[i] * p;
    fb += exc[i] * p;
  }
  const CoupledSystem& sys = gen_->system();
  dy[block_ + 1] = sys.kappa_H * fh;
  dy[block_ + 2] = sys.kappa_V * fv;
  dy[block_ + 3] = sys.gamma0 * fb;
}

}  // namespace detail

double drive_amplitude(const CoupledSystem& sys, const PulseSpec& pulse) {
  pulse.validate();
  const auto m = pulse.polarization == Polarization::H ? std::array{sys.g_H, 0.0, sys.kappa_H}
                                                         : std::array{sys.g_V, sys.delta_V, sys.kappa_V};
  if (pulse.area_rad == 0.0) return 0.0;
  require(m[0] > 0, "the driven cavity mode is not coupled to the emitter");
  const double response = std::abs(cplx{m[2] / 2.0, m[1] - pulse.detuning_per_ps});
  return pulse.area_rad * response / (2.0 * m[0] * pulse.sigma() * std::sqrt(units::two_pi));
}

std::vector<double> EvolutionResult::flux(kernels::Channel channel, const CoupledSystem& sys) const {
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    switch (channel) {
      case kernels::Channel::H: out[i] = sys.kappa_H * n_H[i]; break;
      case kernels::Channel::V: out[i] = sys.kappa_V * n_V[i]; break;
      case kernels::Channel::background: out[i] = sys.gamma0 * pop_e[i]; break;
      case kernels::Channel::laser: break;
    }
  }
  return out;
}

void EvolutionResult::write_csv(std::ostream& os) const {
  os << "time_ps,pop_e,n_H,n_V\n";
  char buf[128];
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", times[i], pop_e[i], n_H[i], n_V[i]);
    os << buf;
  }
}

EvolutionResult evolve(const Generator& gen, const DenseOp& rho0, const std::optional<PulseSpec>& pulse,
                       double t_final_ps, const EvolveOptions& options) {
  const int d = gen.dim();
  require(rho0.rows() == d && rho0.cols() == d, "initial state dimension does not match the Hilbert space");
  require(t_final_ps > 0 && std::isfinite(t_final_ps), "evolution horizon must be positive");
  require(options.dt_out_ps > 0, "output spacing must be positive");
  const auto n_out = static_cast<std::size_t>(std::ceil(t_final_ps / options.dt_out_ps - 1e-9)) + 1;
  require(n_out <= 2'000'000, "too many output points");

  detail::DrivenRhs rhs(gen, pulse, options.backend);
  const std::size_t block = static_cast<std::size_t>(d) * d;
  std::vector<cplx> y(rhs.size(), cplx{0.0, 0.0});
  std::copy(rho0.data(), rho0.data() + block, y.begin());

  OdeOptions ode;
  ode.rtol = options.rtol;
  ode.atol = options.atol;
  Dopri5 solver([&rhs](double t, std::span<const cplx> in, std::span<cplx> out) { rhs(t, in, out); }, y.size(), ode);

  EvolutionResult res;
  res.dim = d;
  res.times.reserve(n_out);
  res.min_eigenvalue = 1.0;
  if (pulse) {
    for (auto& w : pulse->warnings(single_excitation_decay_rate(gen.system()))) res.warnings.push_back(w);
  }

  const auto exc = gen.excited();
  const auto nh = gen.photons_H();
  const auto nv = gen.photons_V();
  double t = 0.0;
  for (std::size_t k = 0; k < n_out; ++k) {
    const double target = std::min(static_cast<double>(k) * options.dt_out_ps, t_final_ps);
    solver.advance(t, y, target);
    Eigen::Map<const DenseOp> rho(y.data(), d, d);
    double tr = 0, pe = 0, ph = 0, pv = 0;
    for (int i = 0; i < d; ++i) {
      const double p = rho(i, i).real();
      tr += p;
      pe += exc[i] * p;
      ph += nh[i] * p;
      pv += nv[i] * p;
    }
    res.times.push_back(target);
    res.pop_e.push_back(pe);
    res.n_H.push_back(ph);
    res.n_V.push_back(pv);
    res.beta.push_back(y[block]);
    res.max_trace_deviation = std::max(res.max_trace_deviation, std::abs(tr - 1.0));
    res.max_hermiticity_deviation =
        std::max(res.max_hermiticity_deviation, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (options.check_positivity) {
      const DenseOp herm = 0.5 * (rho + rho.adjoint());
      Eigen::SelfAdjointEigenSolver<DenseOp> es(herm, Eigen::EigenvaluesOnly);
      res.min_eigenvalue = std::min(res.min_eigenvalue, es.eigenvalues()(0));
    }
    if (options.keep_states) res.states.emplace_back(rho);
  }
  res.emitted.H = y[block + 1].real();
  res.emitted.V = y[block + 2].real();
  res.emitted.background = y[block + 3].real();
  res.stats = solver.stats();
  if (res.max_trace_deviation > 1e-6) res.warnings.push_back("trace drift exceeds 1e-6; tighten tolerances");
  if (res.min_eigenvalue < -1e-6) res.warnings.push_back("density matrix lost positivity beyond 1e-6");
  return res;
}

std::vector<RabiPoint> rabi_scan(const Generator& gen, const PulseSpec& pulse_template,
                                 const std::vector<double>& area_grid, double t_final_ps,
                                 const EvolveOptions& options) {
  require(!area_grid.empty(), "Rabi scan needs at least one pulse area");
  for (double a : area_grid) require(a >= 0 && std::isfinite(a), "pulse areas must be non-negative");
  std::vector<RabiPoint> out(area_grid.size());
  EvolveOptions inner = options;
  inner.backend = kernels::Backend::serial;
  inner.keep_states = false;
  const DenseOp rho0 = ground_state(gen.config());
  const long n = static_cast<long>(area_grid.size());
  std::string failure;
  const bool parallel = options.backend == kernels::Backend::openmp;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long i = 0; i < n; ++i) {
    try {
      PulseSpec p = pulse_template;
      p.area_rad = area_grid[i];
      const auto r = evolve(gen, rho0, p, t_final_ps, inner);
      out[i] = {area_grid[i], r.emitted.total(), r.emitted.H};
    } catch (const std::exception& e) {
#pragma omp critical(spsim_rabi_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError("Rabi scan failed: " + failure);
  return out;
}

double calibrate_pi_area(const Generator& gen, const PulseSpec& pulse_template, double t_final_ps,
                         const EvolveOptions& options) {
  EvolveOptions inner = options;
  inner.check_positivity = false;
  const DenseOp rho0 = ground_state(gen.config());
  auto emission = [&](double area) {
    PulseSpec p = pulse_template;
    p.area_rad = area;
    return evolve(gen, rho0, p, t_final_ps, inner).emitted.total();
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.6 * units::pi, b = 1.6 * units::pi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = emission(x1), f2 = emission(x2);
  while (b - a > 1e-3) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = emission(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = emission(x1);
    }
  }
  const double best = 0.5 * (a + b);
  if (best < 0.6 * units::pi + 2e-3 || best > 1.6 * units::pi - 2e-3) {
    throw NumericalError("pi-pulse calibration hit the edge of the search window");
  }
  return best;
}

double default_horizon_ps(const CoupledSystem& sys, double n_lifetimes) {
  const double rate = single_excitation_decay_rate(sys);
  require(rate > 0, "system has no decay channel");
  return n_lifetimes / rate;
}

DecayFit decay_lifetime(const Generator& gen, const std::optional<PulseSpec>& pulse, const EvolveOptions& options) {
  const CoupledSystem& sys = gen.system();
  if (!sys.is_overdamped()) {
    throw ValidationError("emitter-cavity system is strongly coupled; population decay is not exponential");
  }
  double horizon = default_horizon_ps(sys, 12.0);
  if (pulse) horizon += pulse->center() + 4.0 * pulse->sigma();
  EvolveOptions opt = options;
  opt.keep_states = false;
  opt.dt_out_ps = std::min(options.dt_out_ps, horizon / 2000.0);
  const DenseOp rho0 = pulse ? ground_state(gen.config()) : excited_state(gen.config());
  const auto r = evolve(gen, rho0, pulse, horizon, opt);

  const auto peak_it = std::max_element(r.pop_e.begin(), r.pop_e.end());
  const double peak = *peak_it;
  require(peak > 1e-6, "emitter was not excited");
  std::size_t i0 = static_cast<std::size_t>(peak_it - r.pop_e.begin());
  if (pulse) {
    while (i0 < r.times.size() && r.times[i0] < pulse->center() + 4.0 * pulse->sigma()) ++i0;
  }
  while (i0 < r.pop_e.size() && r.pop_e[i0] > 0.8 * peak) ++i0;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = i0; i < r.pop_e.size() && r.pop_e[i] > 1e-4 * peak; ++i) {
    pts.emplace_back(r.times[i], std::log(r.pop_e[i]));
  }
  if (pts.size() < 10) throw NumericalError("too few points in the decay tail for a lifetime fit");
  for (auto [x, yv] : pts) {
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double ss = 0;
  for (auto [x, yv] : pts) ss += std::pow(yv - (icpt + slope * x), 2);
  DecayFit fit{-1.0 / slope, -slope, std::sqrt(ss / n), pts.size()};
  if (!(slope < 0)) throw NumericalError("population does not decay");
  if (fit.rms_log_residual > 0.01) throw NumericalError("population decay is not mono-exponential");
  return fit;
}

}  // namespace spsim::dynamics
