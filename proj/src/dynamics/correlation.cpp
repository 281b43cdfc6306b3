#include "spsim/dynamics/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spsim/dynamics/rhs.hpp"
#include "spsim/errors.hpp"

namespace spsim::dynamics {

namespace {

// Propagates chi = s- rho(t_i) to the end of the grid and records Tr[s+ chi(t_i + tau_j)].
std::vector<cplx> g1_row(const Generator& gen, const detail::DrivenRhs& rhs, const EvolutionResult& ev,
                         std::size_t i, const OdeOptions& ode) {
  const int d = gen.dim();
  const int per_emitter = d / 2;
  const std::size_t block = static_cast<std::size_t>(d) * d;
  const std::size_t n = ev.times.size();

  const DenseOp chi0 = gen.operators().sigma_minus * ev.states[i];
  std::vector<cplx> y(rhs.size(), cplx{0.0, 0.0});
  std::copy(chi0.data(), chi0.data() + block, y.begin());
  y[rhs.beta_index()] = ev.beta[i];

  auto trace_sp = [&](const std::vector<cplx>& v) {
    cplx s{0.0, 0.0};
    for (int r = 0; r < per_emitter; ++r) s += v[static_cast<std::size_t>(per_emitter + r) * d + r];
    return s;
  };

  Dopri5 solver([&rhs](double t, std::span<const cplx> in, std::span<cplx> out) { rhs(t, in, out); }, y.size(), ode);
  std::vector<cplx> row;
  row.reserve(n - i);
  row.push_back(trace_sp(y));
  double t = ev.times[i];
  for (std::size_t k = i + 1; k < n; ++k) {
    solver.advance(t, y, ev.times[k]);
    row.push_back(trace_sp(y));
  }
  return row;
}

double trapezoid_weight(std::size_t j, std::size_t len) { return (j == 0 || j + 1 == len) ? 0.5 : 1.0; }

}  // namespace

G1Grid g1_two_time(const Generator& gen, const EvolutionResult& evolution, const std::optional<PulseSpec>& pulse,
                   std::size_t t_stride, const EvolveOptions& options) {
  const std::size_t n = evolution.times.size();
  require(n >= 2 && evolution.states.size() == n, "G1 needs an evolution recorded with keep_states");
  require(evolution.dim == gen.dim(), "evolution does not belong to this generator");
  require(t_stride >= 1, "time stride must be at least 1");

  detail::DrivenRhs rhs(gen, pulse, kernels::Backend::serial);
  OdeOptions ode;
  ode.rtol = options.rtol;
  ode.atol = options.atol;

  G1Grid out;
  for (std::size_t i = 0; i < n; i += t_stride) out.t.push_back(evolution.times[i]);
  for (std::size_t j = 0; j < n; ++j) out.tau.push_back(evolution.times[j] - evolution.times[0]);
  out.values = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(out.t.size()), static_cast<Eigen::Index>(n));

  const long rows = static_cast<long>(out.t.size());
  const bool parallel = options.backend == kernels::Backend::openmp;
  std::string failure;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (long r = 0; r < rows; ++r) {
    try {
      const auto row = g1_row(gen, rhs, evolution, static_cast<std::size_t>(r) * t_stride, ode);
      for (std::size_t j = 0; j < row.size(); ++j) out.values(r, static_cast<Eigen::Index>(j)) = row[j];
    } catch (const std::exception& e) {
#pragma omp critical(spsim_g1_failure)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw NumericalError("G1 propagation failed: " + failure);
  return out;
}

Indistinguishability indistinguishability(const Generator& gen, const std::optional<PulseSpec>& pulse,
                                          double t_final_ps, const EvolveOptions& options) {
  EvolveOptions opt = options;
  opt.keep_states = true;
  const DenseOp rho0 = pulse ? ground_state(gen.config()) : excited_state(gen.config());
  const EvolutionResult ev = evolve(gen, rho0, pulse, t_final_ps, opt);
  const G1Grid g1 = g1_two_time(gen, ev, pulse, 1, options);

  const std::size_t n = ev.times.size();
  const double dt = ev.dt();
  double pop = 0.0, num = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pop += trapezoid_weight(i, n) * ev.pop_e[i] * dt;
    double row = 0.0;
    const std::size_t len = n - i;
    for (std::size_t j = 0; j < len; ++j)
      row += trapezoid_weight(j, len) * std::norm(g1.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    num += trapezoid_weight(i, n) * row * dt * dt;
  }
  require(pop > 0, "emitter was never excited");

  Indistinguishability res;
  res.value = 2.0 * num / (pop * pop);
  res.emitted = ev.emitted.total();
  res.emitted_population = pop;
  res.warnings = ev.warnings;
  if (ev.pop_e.back() > 1e-3 * *std::max_element(ev.pop_e.begin(), ev.pop_e.end()))
    res.warnings.push_back("horizon truncates the emission; extend t_final");
  return res;
}

}  // namespace spsim::dynamics
