// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spsim/budget.hpp"
#include "spsim/cli/commands.hpp"
#include "spsim/config.hpp"
#include "spsim/dynamics/correlation.hpp"
#include "spsim/dynamics/evolution.hpp"
#include "spsim/estimators/histogram.hpp"
#include "spsim/estimators/lifetime.hpp"
#include "spsim/estimators/localization.hpp"
#include "spsim/estimators/polarization.hpp"
#include "spsim/estimators/spectrum.hpp"
#include "spsim/model.hpp"
#include "synthetic.hpp"

using namespace spsim;
using namespace spsim::dynamics;

namespace {

constexpr double kPi = 3.141592653589793;
const std::string kPresets = std::string(SPSIM_SOURCE_DIR) + "/presets/";

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("AC%-2d %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string str(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double detail(const cli::Summary& s, const std::string& key) {
  for (const auto& [k, v] : s.details)
    if (k == key) return v;
  return std::nan("");
}

// Worst-case numerical hygiene over every dynamics run below.
struct Hygiene {
  double trace = 0.0;
  double min_eig = 0.0;
  double truncation = 0.0;
  double tolerance = 0.0;
  int runs = 0;

  void record(const EvolutionResult& r) {
    trace = std::max(trace, r.max_trace_deviation);
    min_eig = std::min(min_eig, r.min_eigenvalue);
    ++runs;
  }
  // Re-runs one evolution with a larger Fock space and with halved tolerances
  // and compares the emitted photon numbers.
  EvolutionResult checked(const CoupledSystem& sys, const HilbertConfig& h, const std::optional<PulseSpec>& pulse,
                          double t_final, EvolveOptions opt) {
    opt.check_positivity = true;
    const Generator gen(sys, h);
    const DenseOp rho0 = pulse ? ground_state(h) : excited_state(h);
    const auto base = evolve(gen, rho0, pulse, t_final, opt);
    record(base);

    const HilbertConfig big{h.n_max_H + 1, h.n_max_V + 1};
    const Generator gen_big(sys, big);
    const auto wide = evolve(gen_big, pulse ? ground_state(big) : excited_state(big), pulse, t_final, opt);
    record(wide);

    EvolveOptions tight = opt;
    tight.rtol /= 2;
    tight.atol /= 2;
    const auto fine = evolve(gen, rho0, pulse, t_final, tight);
    record(fine);

    for (auto pick : {+[](const EmissionTotals& e) { return e.H; }, +[](const EmissionTotals& e) { return e.V; }}) {
      truncation = std::max(truncation, std::abs(pick(wide.emitted) - pick(base.emitted)));
      tolerance = std::max(tolerance, std::abs(pick(fine.emitted) - pick(base.emitted)));
    }
    return base;
  }
};

Hygiene hygiene;

void efficiency_anchor() {
  model::OperatingPoint op;
  op.purcell_F = 20;
  op.ratio_r = 3;
  const double e = model::polarized_extraction_efficiency(op);
  report(1, std::abs(e - 0.93) <= 0.005, str("polarized extraction efficiency at F=20, r=3: %.5f (0.93 +- 0.005)", e));
}

void ratio_law() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail_text;
  for (double r : {1.5, 2.5, 3.0}) {
    const CoupledSystem sys = bad_cavity_system(0.5, 100.0, r, 0.0);
    EvolveOptions opt;
    opt.dt_out_ps = 2.0;
    const double t_final = 14.0 / single_excitation_decay_rate(sys);
    const auto ev = hygiene.checked(sys, HilbertConfig{2, 2}, std::nullopt, t_final, opt);
    const double ratio = ev.emitted.H / ev.emitted.V;
    const double expect = model::emission_ratio(r);
    ok = ok && rel(ratio, expect) <= 0.05;
    detail_text += str(" r=%.1f: %.3f vs %.3f;", r, ratio, expect);
  }
  const double secs = seconds_since(t0);
  report(2, ok && secs < 60, str("H:V emission vs 1+4r^2 at kappa=100g:%s %.1f s", detail_text.c_str(), secs));
}

void pi_power_anchor() {
  const double f = model::pi_power_factor(2.5);
  report(3, std::abs(f - 7.25) < 1e-12 && std::abs(f - 7.0) <= 0.5, str("pi-power factor at r=2.5: %.4f (7.25; ~7 +- 0.5)", f));
}

void purcell_lifetime() {
  bool ok = true;
  std::string text;
  for (auto [name, target] : {std::pair{"micropillar", 61.0}, std::pair{"bullseye", 69.0}}) {
    const auto cfg = config::load_config(kPresets + name + ".cfg");
    cli::RunContext ctx;
    ctx.seed = cfg.seed;
    const auto res = cli::cmd_lifetime(cfg, ctx);
    ok = ok && rel(res.summary.value, target) <= 0.02;
    text += str(" %s F=%.1f: %.2f ps (%.0f +- 2%%);", name, cfg.purcell_measured, res.summary.value, target);

    // Hygiene on the same pulsed scenario.
    const CoupledSystem sys = cfg.coupled_system();
    PulseSpec pulse = cfg.pulse;
    const double horizon = pulse.center() + 4 * pulse.sigma() + default_horizon_ps(sys, cfg.horizon_lifetimes);
    hygiene.checked(sys, cfg.hilbert, pulse, horizon, cfg.numerics);
  }
  report(4, ok, "fitted TCSPC lifetime:" + text);
}

void budget_anchor() {
  const auto mp = config::load_config(kPresets + "micropillar.cfg");
  const auto be = config::load_config(kPresets + "bullseye.cfg");
  const double chain = budget::chain_efficiency(mp.budget);
  const double missing = budget::infer_missing_factor(be.budget, 0.56);
  report(5, std::abs(chain - 0.60) <= 0.01 && std::abs(missing - 0.8615) <= 1e-3,
         str("source chain %.5f (0.60 +- 0.01); bullseye residual %.5f (0.8615 +- 1e-3)", chain, missing));
}

void dop_anchor() {
  const double dop = model::degree_of_polarization(13.7e6, 0.54e6);
  const double v_fraction = 0.54e6 / (13.7e6 + 0.54e6);
  report(6, std::abs(dop - 0.924) <= 0.005 && std::abs(v_fraction - 0.038) <= 0.002,
         str("DOP %.4f (0.924 +- 0.005); V fraction %.4f (0.038 +- 0.002)", dop, v_fraction));
}

void correlation_round_trip() {
  auto cfg = config::load_config(kPresets + "micropillar.cfg");
  cfg.correlation.n_pulses = 1'000'000;
  cli::RunContext ctx;
  ctx.seed = cfg.seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = cli::cmd_g2(cfg, ctx);
  const double secs = seconds_since(t0);
  report(7, std::abs(res.summary.value - 0.025) <= 0.005 && secs < 60,
         str("g2(0) from 1e6 synthetic pulses: %.4f +- %.4f (0.025 +- 0.005), %.1f s", res.summary.value,
             res.summary.uncertainty, secs));
}

void hom_anchor() {
  const auto c = estimators::hom_corrected(0.913, 0.025, 0.47);
  bool ok = std::abs(c.value - 0.975) <= 0.010;
  std::string text = str("corrected(0.913, 0.025, R=0.47) = %.4f (0.975 +- 0.010);", c.value);
  const double p = 0.6, R = 0.47;
  const double mu = oracle::leakage_for_g2_bisect(0.025, p);
  std::uint64_t seed = 101;
  for (double overlap : {0.95, 0.90}) {
    const auto mz = oracle::mach_zehnder(p, mu, overlap, R, 4'000'000, seed++);
    const auto back = estimators::hom_corrected(std::clamp(mz.visibility_raw, 0.0, 1.0), mz.g2, R);
    ok = ok && std::abs(back.unclamped - overlap) <= 0.005;
    text += str(" splitter MC overlap %.2f -> %.4f (V_raw %.4f, g2 %.4f);", overlap, back.unclamped, mz.visibility_raw,
                mz.g2);
  }
  report(8, ok, text);
}

void dephasing_law() {
  const double gamma_rad = bad_cavity_system(0.05, 100.0, 3.0, 0.0).total_rate_adiabatic();
  bool ok = true;
  std::string text;
  for (double ratio : {0.0, 0.1, 0.5, 1.0}) {
    const CoupledSystem sys = bad_cavity_system(0.05, 100.0, 3.0, 0.0, ratio * gamma_rad);
    const double gamma = single_excitation_decay_rate(sys);
    EvolveOptions opt;
    opt.dt_out_ps = 0.1 / gamma;
    const double t_final = 14.0 / gamma;
    // A single excitation needs one Fock level per mode; the hygiene pass checks that against two.
    hygiene.checked(sys, HilbertConfig{1, 1}, std::nullopt, t_final, opt);
    const Generator gen(sys, HilbertConfig{1, 1});
    const auto ind = indistinguishability(gen, std::nullopt, t_final, opt);
    const double expect = gamma / (gamma + 2 * ratio * gamma_rad);
    ok = ok && rel(ind.value, expect) <= 0.02;
    text += str(" %.1f: %.4f vs %.4f;", ratio, ind.value, expect);
  }
  report(9, ok, "indistinguishability vs Gamma/(Gamma+2 gamma*) at gamma*/Gamma =" + text);
}

void numerical_hygiene() {
  const bool ok = hygiene.trace < 1e-8 && hygiene.min_eig > -1e-8 && hygiene.truncation < 1e-3 && hygiene.tolerance < 1e-4;
  report(10, ok,
         str("%d runs: trace dev %.2e, min eigenvalue %.2e, truncation shift %.2e, tolerance-halving shift %.2e",
             hygiene.runs, hygiene.trace, hygiene.min_eig, hygiene.truncation, hygiene.tolerance));
}

// Relative error of a noiseless fit and the mean reported uncertainty at a signal
// scale N and at 10 N.
struct RoundTrip {
  std::string name;
  std::function<double()> noiseless_error;
  std::function<double(double scale, std::mt19937_64& rng)> sigma_at;
};

void fitter_round_trips() {
  const synth::Doublet d;
  const std::vector<RoundTrip> cases = {
      {"doublet",
       [&] {
         const auto f = estimators::fit_lorentzian_doublet(synth::spectrum(d));
         return std::max({rel(f.first.center_nm, d.c1), rel(f.second.center_nm, d.c2), rel(f.first.fwhm_nm, d.w1),
                          rel(f.second.fwhm_nm, d.w2), rel(f.first.amplitude, d.a1), rel(f.second.amplitude, d.a2)});
       },
       [&](double s, std::mt19937_64& rng) {
         return estimators::fit_lorentzian_doublet(synth::spectrum(d, s, &rng)).first.center_sigma_nm;
       }},
      {"malus",
       [] {
         const auto f = estimators::fit_malus_dop(synth::polar(1000, 40, 32));
         return std::max({rel(f.dop, 1000.0 / 1080.0), rel(f.axis_deg, 32.0), rel(f.amplitude, 1000.0),
                          rel(f.background, 40.0)});
       },
       [](double s, std::mt19937_64& rng) {
         return estimators::fit_malus_dop(synth::polar(1000 * s, 40 * s, 32, &rng)).dop_sigma;
       }},
      {"lifetime",
       [] {
         const auto f = estimators::fit_exp_lifetime(synth::decay(5000, 100, 61, 2, 20));
         return std::max({rel(f.tau_ps, 61.0), rel(f.t0_ps, 100.0), rel(f.amplitude, 5000.0), rel(f.background, 2.0)});
       },
       [](double s, std::mt19937_64& rng) {
         return estimators::fit_exp_lifetime(synth::decay(500 * s, 100, 61, 0.2 * s, 20, &rng)).tau_sigma_ps;
       }},
      {"g2",
       [] {
         const auto h = synth::histogram(0.025, 1e5, 61);
         const auto raw = estimators::hom_visibility_raw(synth::histogram(0.05, 1e5, 61), synth::histogram(0.5, 1e5, 61));
         return std::max(rel(estimators::g2_from_histogram(h).value, 0.025), rel(raw.visibility, 0.9));
       },
       [](double s, std::mt19937_64& rng) {
         return estimators::g2_from_histogram(synth::histogram(0.1, 1000 * s, 61, &rng)).uncertainty;
       }},
      {"localization",
       [] {
         const auto f = estimators::fit_gaussian_centroid_2d(synth::spot(4000, 15.3, 14.6, 2.2, 100));
         return std::max({rel(f.x_nm, 15.3 * 50), rel(f.y_nm, 14.6 * 50), rel(f.sigma_nm, 2.2 * 50),
                          rel(f.amplitude, 4000.0), rel(f.background, 100.0)});
       },
       [](double s, std::mt19937_64& rng) {
         return estimators::fit_gaussian_centroid_2d(synth::spot(400 * s, 15.3, 14.6, 2.2, 10 * s, &rng)).uncertainty_nm;
       }},
  };

  bool ok = true;
  std::string text;
  std::mt19937_64 rng(2024);
  for (const auto& c : cases) {
    const double err = c.noiseless_error();
    double s1 = 0.0, s10 = 0.0;
    const int reps = 20;
    for (int i = 0; i < reps; ++i) {
      s1 += c.sigma_at(1.0, rng) / reps;
      s10 += c.sigma_at(10.0, rng) / reps;
    }
    const double scaling = (s1 / s10) / std::sqrt(10.0);
    ok = ok && err <= 1e-6 && std::abs(scaling - 1.0) <= 0.2;
    text += str(" %s err %.1e, sigma ratio/sqrt(10) %.3f;", c.name.c_str(), err, scaling);
  }
  report(11, ok, "estimator round trips:" + text);
}

void count_rate_chain() {
  const auto cfg = config::load_config(kPresets + "micropillar.cfg");
  const auto res = cli::cmd_budget(cfg, std::nullopt);
  const double rate = detail(res.summary, "count_rate_per_s");
  report(12, rel(rate, 13.7e6) <= 0.05 && cfg.collection.rep_rate_mhz == 76.0 && cfg.collection.detector_efficiency == 0.76,
         str("predicted count rate %.4g /s at %.0f MHz, detector %.2f (13.7e6 +- 5%%)", rate, cfg.collection.rep_rate_mhz,
             cfg.collection.detector_efficiency));
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<void()>>> checks = {
      {1, efficiency_anchor}, {2, ratio_law},        {3, pi_power_anchor},         {4, purcell_lifetime},
      {5, budget_anchor},     {6, dop_anchor},        {7, correlation_round_trip}, {8, hom_anchor},
      {9, dephasing_law},     {10, numerical_hygiene}, {11, fitter_round_trips},   {12, count_rate_chain}};
  for (const auto& [id, check] : checks) {
    try {
      check();
    } catch (const std::exception& e) {
      report(id, false, std::string("error: ") + e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
