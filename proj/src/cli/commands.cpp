#include "spsim/cli/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "spsim/budget.hpp"
#include "spsim/dynamics/correlation.hpp"
#include "spsim/dynamics/detection.hpp"
#include "spsim/dynamics/evolution.hpp"
#include "spsim/dynamics/sampling.hpp"
#include "spsim/errors.hpp"
#include "spsim/estimators/csv_io.hpp"
#include "spsim/estimators/lifetime.hpp"
#include "spsim/estimators/localization.hpp"
#include "spsim/estimators/polarization.hpp"
#include "spsim/estimators/spectrum.hpp"
#include "spsim/model.hpp"
#include "spsim/units.hpp"

namespace spsim::cli {

namespace {

using config::RunConfig;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      out_ << (first ? "" : ",") << fmt(v);
      first = false;
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::uint64_t require_seed(const RunContext& ctx, const RunConfig& cfg, const char* command) {
  if (ctx.seed) return *ctx.seed;
  if (cfg.seed) return *cfg.seed;
  throw ValidationError(std::string(command) + " needs a seed: pass --seed or set [run] seed");
}

// Emitter-cavity system, generator and (optionally calibrated) pulse of a config.
struct Source {
  dynamics::CoupledSystem sys;
  dynamics::Generator gen;
  dynamics::PulseSpec pulse;
  double horizon_ps;
  dynamics::EvolveOptions options;
};

Source prepare_source(const RunConfig& cfg, kernels::Backend backend, bool calibrate) {
  const auto sys = cfg.coupled_system();
  Source s{sys, dynamics::Generator(sys, cfg.hilbert), cfg.pulse, 0.0, cfg.numerics};
  s.options.backend = backend;
  s.horizon_ps = s.pulse.center() + 4.0 * s.pulse.sigma() + dynamics::default_horizon_ps(sys, cfg.horizon_lifetimes);
  if (calibrate && cfg.calibrate_pi) {
    s.pulse.area_rad = dynamics::calibrate_pi_area(s.gen, s.pulse, s.horizon_ps, s.options);
  }
  return s;
}

void add_warnings(Summary& s, const std::vector<std::string>& w) {
  for (const auto& x : w)
    if (std::find(s.warnings.begin(), s.warnings.end(), x) == s.warnings.end()) s.warnings.push_back(x);
}

double leakage_mean(const RunConfig& cfg, double p_signal) {
  if (cfg.correlation.leakage_prob) return *cfg.correlation.leakage_prob;
  if (cfg.correlation.target_g2) return dynamics::leakage_for_g2(*cfg.correlation.target_g2, p_signal);
  return 0.0;
}

dynamics::CoincidenceSetup coincidence_setup(const RunConfig& cfg, double reflectance) {
  dynamics::CoincidenceSetup setup;
  setup.bins_per_period = cfg.correlation.bins_per_period;
  setup.side_peaks = cfg.correlation.side_peaks;
  setup.reflectance = reflectance;
  setup.detection_efficiency = cfg.correlation.detection_efficiency;
  return setup;
}

std::string fit_table_csv(const std::vector<std::tuple<std::string, double, double>>& rows) {
  std::ostringstream out;
  out << "parameter,value,uncertainty\n";
  for (const auto& [name, v, u] : rows) out << name << ',' << fmt(v) << ',' << fmt(u) << '\n';
  return out.str();
}

}  // namespace

CommandResult cmd_sweep(const RunConfig& cfg) {
  const auto& sw = cfg.sweep;
  const auto grid = model::linear_grid(sw.ratio_min, sw.ratio_max, sw.ratio_step);
  const auto rows = model::efficiency_sweep(sw.purcell_values, grid);
  CsvWriter csv({"purcell_F", "ratio_r", "efficiency", "power_factor"});
  for (const auto& r : rows) csv.row({r.purcell_F, r.ratio_r, r.efficiency, r.power_factor});

  CommandResult res;
  res.name = "sweep";
  res.csv = csv.str();
  res.summary.quantity = "polarized_extraction_efficiency";
  res.summary.value = model::polarized_extraction_efficiency({sw.design_purcell, sw.design_ratio});
  res.summary.details = {{"design_purcell", sw.design_purcell},
                         {"design_ratio", sw.design_ratio},
                         {"pi_power_factor", model::pi_power_factor(sw.design_ratio)}};
  return res;
}

CommandResult cmd_rabi(const RunConfig& cfg, const RunContext& ctx) {
  Source src = prepare_source(cfg, ctx.backend, true);
  std::vector<double> areas;
  for (int i = 0; i < cfg.rabi.points; ++i) areas.push_back(cfg.rabi.area_max_rad * i / (cfg.rabi.points - 1));
  const auto scan = dynamics::rabi_scan(src.gen, src.pulse, areas, src.horizon_ps, src.options);
  const auto at_pi =
      dynamics::evolve(src.gen, dynamics::ground_state(cfg.hilbert), src.pulse, src.horizon_ps, src.options);
  const double peak_H = at_pi.emitted.H;
  require(peak_H > 0, "no H-polarized emission at the pi pulse");

  // Detected rate: peak-normalized Rabi curve x source efficiency x collection chain.
  const double source_eff = budget::chain_efficiency(cfg.budget);
  CsvWriter csv({"area_rad", "emitted_total", "emitted_H", "count_rate_per_s"});
  std::size_t best = 0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double rate = budget::predict_count_rate(source_eff * scan[i].emitted_H / peak_H, cfg.collection);
    csv.row({scan[i].area_rad, scan[i].emitted_total, scan[i].emitted_H, rate});
    if (best == 0 && i > 0 && i + 1 < scan.size() && scan[i].emitted_H >= scan[i - 1].emitted_H &&
        scan[i].emitted_H > scan[i + 1].emitted_H)
      best = i;
  }

  CommandResult res;
  res.name = "rabi";
  res.csv = csv.str();
  auto& s = res.summary;
  s.quantity = "count_rate_at_pi_per_s";
  s.value = budget::predict_count_rate(source_eff, cfg.collection);
  s.details = {{"pi_area_rad", src.pulse.area_rad},
               {"emitted_H_at_pi", at_pi.emitted.H},
               {"emitted_total_at_pi", at_pi.emitted.total()},
               {"first_maximum_area_rad", scan[best].area_rad},
               {"source_efficiency", source_eff},
               {"collection_efficiency", budget::chain_efficiency(cfg.collection) * cfg.collection.detector_efficiency}};
  add_warnings(s, at_pi.warnings);
  return res;
}

CommandResult cmd_lifetime(const RunConfig& cfg, const RunContext& ctx) {
  const std::uint64_t seed = ctx.seed.value_or(cfg.seed.value_or(1));
  Source src = prepare_source(cfg, ctx.backend, false);
  const auto population = dynamics::decay_lifetime(src.gen, src.pulse, src.options);

  // TCSPC synthesis: H-mode flux convolved with the Gaussian IRF, binned, Poisson noise.
  dynamics::EvolveOptions fine = src.options;
  fine.dt_out_ps = std::min(0.25, cfg.lifetime.bin_ps / 4.0);
  const auto ev = dynamics::evolve(src.gen, dynamics::ground_state(cfg.hilbert), src.pulse, src.horizon_ps, fine);
  const auto flux = ev.flux(kernels::Channel::H, src.sys);
  const double sigma = units::gaussian_sigma_from_fwhm(cfg.lifetime.irf_fwhm_ps);
  const double dt = ev.dt();
  const double bin = cfg.lifetime.bin_ps;
  const auto n_bins = static_cast<std::size_t>(std::floor(ev.times.back() / bin));
  std::vector<double> expected(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double tc = (b + 0.5) * bin;
    double acc = 0.0;
    for (std::size_t i = 0; i < flux.size(); ++i) {
      const double w = sigma > 0 ? std::exp(-0.5 * std::pow((tc - ev.times[i]) / sigma, 2)) /
                                       (sigma * std::sqrt(units::two_pi))
                                 : (std::abs(tc - ev.times[i]) < 0.5 * dt ? 1.0 / dt : 0.0);
      acc += w * flux[i] * dt;
    }
    expected[b] = acc;
  }
  double total = 0.0;
  for (double e : expected) total += e;
  require(total > 0, "no H-polarized emission to histogram");
  std::mt19937_64 rng(seed);
  estimators::DecayTrace trace;
  // The recorded instrument response includes the excitation pulse.
  trace.irf_fwhm_ps = std::hypot(cfg.lifetime.irf_fwhm_ps, src.pulse.fwhm_ps);
  for (std::size_t b = 0; b < n_bins; ++b) {
    const double mean = expected[b] / total * cfg.lifetime.counts;
    trace.time_ps.push_back((b + 0.5) * bin);
    trace.counts.push_back(mean > 0 ? static_cast<double>(std::poisson_distribution<long>(mean)(rng)) : 0.0);
  }
  const auto fit = estimators::fit_exp_lifetime(trace);

  std::ostringstream csv;
  estimators::write_decay_trace(csv, trace);
  CommandResult res;
  res.name = "lifetime";
  res.csv = csv.str();
  auto& s = res.summary;
  s.quantity = "lifetime_ps";
  s.value = fit.tau_ps;
  s.uncertainty = fit.tau_sigma_ps;
  s.details = {{"population_lifetime_ps", population.lifetime_ps},
               {"purcell_measured", cfg.purcell_measured},
               {"tau_bulk_ps", cfg.emitter.tau_bulk_ps},
               {"coupling_g_per_ps", src.sys.g_H},
               {"fit_iterations", static_cast<double>(fit.fit.iterations)}};
  add_warnings(s, ev.warnings);
  add_warnings(s, fit.warnings);
  return res;
}

CommandResult cmd_g2(const RunConfig& cfg, const RunContext& ctx) {
  const std::uint64_t seed = require_seed(ctx, cfg, "g2");
  Source src = prepare_source(cfg, ctx.backend, true);
  const auto ev = dynamics::evolve(src.gen, dynamics::ground_state(cfg.hilbert), src.pulse, src.horizon_ps, src.options);
  const double leak = leakage_mean(cfg, ev.emitted.H);
  const auto records = dynamics::sample_photon_records(ev, src.sys, src.pulse, cfg.correlation.n_pulses, seed, leak,
                                                       ctx.backend);
  const auto hist = dynamics::hbt_histogram(records, coincidence_setup(cfg, cfg.correlation.hbt_reflectance), seed,
                                            ctx.backend);
  const auto g2 = estimators::g2_from_histogram(hist);

  std::ostringstream csv;
  estimators::write_histogram(csv, hist);
  CommandResult res;
  res.name = "g2";
  res.csv = csv.str();
  auto& s = res.summary;
  s.quantity = "g2_zero";
  s.value = g2.value;
  s.uncertainty = g2.uncertainty;
  s.details = {{"leakage_mean", leak},
               {"emitted_H_per_pulse", ev.emitted.H},
               {"n_pulses", static_cast<double>(cfg.correlation.n_pulses)},
               {"center_area", g2.center_area},
               {"side_mean", g2.side_mean},
               {"pi_area_rad", src.pulse.area_rad}};
  add_warnings(s, ev.warnings);
  return res;
}

CommandResult cmd_hom(const RunConfig& cfg, const RunContext& ctx) {
  const std::uint64_t seed = require_seed(ctx, cfg, "hom");
  Source src = prepare_source(cfg, ctx.backend, true);
  const auto ev = dynamics::evolve(src.gen, dynamics::ground_state(cfg.hilbert), src.pulse, src.horizon_ps, src.options);

  double overlap = 0.0;
  std::vector<std::string> warnings = ev.warnings;
  if (cfg.correlation.indistinguishability) {
    overlap = *cfg.correlation.indistinguishability;
  } else {
    dynamics::EvolveOptions g1_opt = src.options;
    g1_opt.dt_out_ps = cfg.correlation.g1_dt_ps;
    g1_opt.check_positivity = false;
    const auto ind = dynamics::indistinguishability(src.gen, src.pulse, src.horizon_ps, g1_opt);
    overlap = std::clamp(ind.value, 0.0, 1.0);
    warnings.insert(warnings.end(), ind.warnings.begin(), ind.warnings.end());
  }

  const double leak = leakage_mean(cfg, ev.emitted.H);
  const auto records = dynamics::sample_photon_records(ev, src.sys, src.pulse, cfg.correlation.n_pulses, seed, leak,
                                                       ctx.backend);
  const double R = cfg.correlation.reflectance;
  const auto hom = dynamics::hom_histograms(records, overlap, coincidence_setup(cfg, R), seed, ctx.backend);
  const auto hbt = dynamics::hbt_histogram(records, coincidence_setup(cfg, cfg.correlation.hbt_reflectance), seed,
                                           ctx.backend);
  const auto raw = estimators::hom_visibility_raw(hom.parallel, hom.cross);
  const auto g2 = estimators::g2_from_histogram(hbt);
  const auto corrected = estimators::hom_corrected(std::clamp(raw.visibility, 0.0, 1.0), std::min(g2.value, 0.999), R);
  const double T = 1.0 - R;

  CsvWriter csv({"delay_ps", "counts_parallel", "counts_cross"});
  for (std::size_t k = 0; k < hom.parallel.counts.size(); ++k)
    csv.row({hom.parallel.delay(k), hom.parallel.counts[k], hom.cross.counts[k]});

  CommandResult res;
  res.name = "hom";
  res.csv = csv.str();
  auto& s = res.summary;
  s.quantity = "indistinguishability_corrected";
  s.value = corrected.value;
  s.uncertainty = raw.uncertainty * (R * R + T * T) / (2.0 * R * T);
  s.details = {{"visibility_raw", raw.visibility},
               {"visibility_raw_uncertainty", raw.uncertainty},
               {"g2_zero", g2.value},
               {"reflectance", R},
               {"model_indistinguishability", overlap},
               {"leakage_mean", leak},
               {"n_pulses", static_cast<double>(cfg.correlation.n_pulses)}};
  add_warnings(s, warnings);
  if (corrected.clamped) s.warnings.push_back(corrected.warning);
  return res;
}

CommandResult cmd_budget(const RunConfig& cfg, std::optional<double> target) {
  const auto rows = budget::budget_report(cfg.budget);
  const double chain = budget::chain_efficiency(cfg.budget);
  std::ostringstream csv, table;
  csv << "stage,factor,cumulative\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %10s %12s\n", "stage", "factor", "cumulative");
  table << line;
  for (const auto& r : rows) {
    csv << r.stage << ',' << fmt(r.factor) << ',' << fmt(r.cumulative) << '\n';
    std::snprintf(line, sizeof line, "%-24s %10.4f %12.4f\n", r.stage.c_str(), r.factor, r.cumulative);
    table << line;
  }
  std::snprintf(line, sizeof line, "%-24s %10s %12.4f\n", "total", "", chain);
  table << line;

  CommandResult res;
  res.name = "budget";
  auto& s = res.summary;
  s.quantity = "chain_efficiency";
  s.value = chain;
  s.details.push_back({"chain_efficiency", chain});
  if (!target) target = cfg.budget_target;
  if (target) {
    const double missing = budget::infer_missing_factor(cfg.budget, *target);
    csv << "inferred," << fmt(missing) << ',' << fmt(*target) << '\n';
    std::snprintf(line, sizeof line, "%-24s %10.4f %12.4f\n", "inferred (residual)", missing, *target);
    table << line;
    s.quantity = "missing_factor";
    s.value = missing;
    s.details.push_back({"target", *target});
  }
  if (!cfg.collection.stages.empty() || cfg.collection.detector_efficiency != 1.0) {
    const double rate = budget::predict_count_rate(chain, cfg.collection);
    s.details.push_back({"count_rate_per_s", rate});
    std::snprintf(line, sizeof line, "predicted count rate: %.4g counts/s at %.4g MHz\n", rate,
                  cfg.collection.rep_rate_mhz);
    table << line;
  }
  res.csv = csv.str();
  res.table = table.str();
  return res;
}

CommandResult cmd_fit(const FitRequest& req) {
  const auto& in = req.inputs;
  auto need = [&](std::size_t n) {
    if (in.size() != n)
      throw ValidationError("fit " + req.kind + " takes " + std::to_string(n) + " input file(s), got " +
                            std::to_string(in.size()));
  };
  CommandResult res;
  res.name = "fit_" + req.kind;
  auto& s = res.summary;
  std::vector<std::tuple<std::string, double, double>> rows;

  if (req.kind == "doublet") {
    need(1);
    const auto spec = estimators::read_file(in[0], estimators::read_spectrum);
    const auto f = estimators::fit_lorentzian_doublet(spec);
    const double l1 = f.first.center_nm, l2 = f.second.center_nm;
    const double split_sigma = units::c_nm_ghz * std::hypot(f.first.center_sigma_nm / (l1 * l1),
                                                            f.second.center_sigma_nm / (l2 * l2));
    rows = {{"center1_nm", l1, f.first.center_sigma_nm},
            {"fwhm1_nm", f.first.fwhm_nm, f.first.fwhm_sigma_nm},
            {"center2_nm", l2, f.second.center_sigma_nm},
            {"fwhm2_nm", f.second.fwhm_nm, f.second.fwhm_sigma_nm},
            {"splitting_ghz", f.splitting_ghz, split_sigma}};
    s.quantity = "splitting_ghz";
    s.value = f.splitting_ghz;
    s.uncertainty = split_sigma;
    s.details = {{"center1_nm", l1},
                 {"center2_nm", l2},
                 {"fwhm1_nm", f.first.fwhm_nm},
                 {"fwhm2_nm", f.second.fwhm_nm},
                 {"amplitude1", f.first.amplitude},
                 {"amplitude2", f.second.amplitude},
                 {"background", f.background},
                 {"relative_residual", f.relative_residual},
                 {"iterations", static_cast<double>(f.fit.iterations)}};
  } else if (req.kind == "dop") {
    need(1);
    const auto scan = estimators::read_file(in[0], estimators::read_polar_scan);
    const auto f = estimators::fit_malus_dop(scan);
    rows = {{"dop", f.dop, f.dop_sigma}, {"axis_deg", f.axis_deg, 0.0}};
    s.quantity = "degree_of_polarization";
    s.value = f.dop;
    s.uncertainty = f.dop_sigma;
    s.details = {{"axis_deg", f.axis_deg}, {"amplitude", f.amplitude}, {"background", f.background}};
    if (!f.axis_defined) s.warnings.push_back("intensity is independent of angle; polarization axis undefined");
  } else if (req.kind == "lifetime") {
    need(1);
    const auto trace = estimators::read_file(in[0], estimators::read_decay_trace);
    const auto f = estimators::fit_exp_lifetime(trace);
    rows = {{"tau_ps", f.tau_ps, f.tau_sigma_ps}, {"t0_ps", f.t0_ps, 0.0}, {"background", f.background, 0.0}};
    s.quantity = "lifetime_ps";
    s.value = f.tau_ps;
    s.uncertainty = f.tau_sigma_ps;
    s.details = {{"t0_ps", f.t0_ps},
                 {"amplitude", f.amplitude},
                 {"background", f.background},
                 {"deviance", f.fit.cost},
                 {"iterations", static_cast<double>(f.fit.iterations)}};
    s.warnings = f.warnings;
  } else if (req.kind == "g2") {
    need(1);
    const auto h = estimators::read_file(in[0], estimators::read_histogram);
    const auto g = estimators::g2_from_histogram(h);
    rows = {{"g2_zero", g.value, g.uncertainty}};
    s.quantity = "g2_zero";
    s.value = g.value;
    s.uncertainty = g.uncertainty;
    s.details = {{"center_area", g.center_area},
                 {"side_mean", g.side_mean},
                 {"side_peaks_per_side", static_cast<double>(g.side_peaks_per_side)}};
  } else if (req.kind == "hom") {
    need(2);
    const auto par = estimators::read_file(in[0], estimators::read_histogram);
    const auto cross = estimators::read_file(in[1], estimators::read_histogram);
    const auto v = estimators::hom_visibility_raw(par, cross);
    rows = {{"visibility_raw", v.visibility, v.uncertainty}};
    s.quantity = "visibility_raw";
    s.value = v.visibility;
    s.uncertainty = v.uncertainty;
    s.details = {{"parallel_normalized", v.parallel_normalized}, {"cross_normalized", v.cross_normalized}};
    if (req.reflectance || req.g2) {
      if (!(req.reflectance && req.g2)) throw ValidationError("HOM correction needs both --reflectance and --g2");
      const auto c = estimators::hom_corrected(std::clamp(v.visibility, 0.0, 1.0), *req.g2, *req.reflectance);
      const double r = *req.reflectance, t = 1.0 - r;
      rows.emplace_back("indistinguishability_corrected", c.value, v.uncertainty * (r * r + t * t) / (2.0 * r * t));
      s.details.push_back({"indistinguishability_corrected", c.value});
      if (c.clamped) s.warnings.push_back(c.warning);
    }
  } else if (req.kind == "localize") {
    need(1);
    const auto img = estimators::read_file(in[0], estimators::read_image);
    const auto f = estimators::fit_gaussian_centroid_2d(img);
    rows = {{"x_nm", f.x_nm, f.uncertainty_nm},
            {"y_nm", f.y_nm, f.uncertainty_nm},
            {"sigma_nm", f.sigma_nm, f.fit.sigma(3) * img.pixel_pitch_nm}};
    s.quantity = "centroid_x_nm";
    s.value = f.x_nm;
    s.uncertainty = f.uncertainty_nm;
    s.details = {{"y_nm", f.y_nm},
                 {"sigma_nm", f.sigma_nm},
                 {"centroid_uncertainty_nm", f.uncertainty_nm},
                 {"amplitude", f.amplitude},
                 {"background", f.background},
                 {"saturated", f.saturated ? 1.0 : 0.0}};
    s.warnings = f.warnings;
  } else {
    throw ValidationError("unknown fit kind '" + req.kind + "' (doublet, dop, lifetime, g2, hom, localize)");
  }
  res.csv = fit_table_csv(rows);
  return res;
}

std::string summary_json(const Summary& s, const std::string& digest, std::optional<std::uint64_t> seed) {
  nlohmann::ordered_json j;
  j["quantity"] = s.quantity;
  j["value"] = s.value;
  j["uncertainty"] = s.uncertainty;
  j["inputs_digest"] = digest;
  if (seed)
    j["seed"] = *seed;
  else
    j["seed"] = nullptr;
  j["version"] = SPSIM_VERSION;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  for (const auto& [k, v] : s.details) details[k] = v;
  j["details"] = details;
  j["warnings"] = s.warnings;
  return j.dump(2) + "\n";
}

namespace {

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw ValidationError("failed writing " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Polarized single-photon source simulator and analysis toolkit"};
  app.set_version_flag("--version", std::string("spsim ") + SPSIM_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out_dir;
  std::string format = "json";
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "Run configuration (INI)");
    if (needs_config) c->required();
    sub->add_option("--seed", seed, "Random seed (64-bit)");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--out", out_dir, "Directory for <command>.csv and <command>.json");
    sub->add_option("--format", format, "Standard output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* sweep = app.add_subcommand("sweep", "Efficiency and pi-power curves versus splitting/linewidth");
  auto* rabi = app.add_subcommand("rabi", "Rabi curve and detected count rate");
  auto* lifetime = app.add_subcommand("lifetime", "Radiative lifetime from a synthetic TCSPC trace");
  auto* g2 = app.add_subcommand("g2", "Hanbury Brown-Twiss g2(0) from a synthetic photon stream");
  auto* hom = app.add_subcommand("hom", "Hong-Ou-Mandel visibility and corrected indistinguishability");
  auto* fit = app.add_subcommand("fit", "Run one estimator on CSV input");
  auto* bud = app.add_subcommand("budget", "Loss budget report");
  for (auto* sub : {sweep, rabi, lifetime, g2, hom, bud}) add_common(sub, true);
  add_common(fit, false);

  FitRequest fit_req;
  fit->add_option("kind", fit_req.kind, "doublet, dop, lifetime, g2, hom or localize")
      ->required()
      ->check(CLI::IsMember({"doublet", "dop", "lifetime", "g2", "hom", "localize"}));
  fit->add_option("--input,-i", fit_req.inputs, "Input CSV (hom: parallel then cross)")->required();
  fit->add_option("--reflectance", fit_req.reflectance, "Splitter reflectance for the HOM correction");
  fit->add_option("--g2", fit_req.g2, "g2(0) for the HOM correction");
  std::optional<double> target;
  bud->add_option("--target", target, "Measured end-to-end efficiency; infers the missing factor");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    kernels::set_thread_count(jobs);
    RunContext ctx;
    ctx.seed = seed;
    ctx.backend = jobs > 1 ? kernels::Backend::openmp : kernels::Backend::serial;

    CommandResult result;
    std::string digest_input;
    std::optional<std::uint64_t> used_seed = seed;
    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "fit") {
      result = cmd_fit(fit_req);
      digest_input = "fit " + fit_req.kind + "\n";
      for (const auto& path : fit_req.inputs) {
        std::ifstream f(path, std::ios::binary);
        std::ostringstream ss;
        ss << f.rdbuf();
        digest_input += ss.str();
      }
      if (fit_req.reflectance) digest_input += "reflectance=" + fmt(*fit_req.reflectance) + "\n";
      if (fit_req.g2) digest_input += "g2=" + fmt(*fit_req.g2) + "\n";
    } else {
      const auto cfg = config::load_config(config_path);
      if (!used_seed) used_seed = cfg.seed;
      if (command == "sweep") result = cmd_sweep(cfg);
      else if (command == "rabi") result = cmd_rabi(cfg, ctx);
      else if (command == "lifetime") {
        if (!used_seed) used_seed = 1;
        result = cmd_lifetime(cfg, ctx);
      } else if (command == "g2") result = cmd_g2(cfg, ctx);
      else if (command == "hom") result = cmd_hom(cfg, ctx);
      else result = cmd_budget(cfg, target);
      digest_input = cfg.canonical + "command=" + command + "\n";
      if (target) digest_input += "target=" + fmt(*target) + "\n";
      if (command == "sweep" || command == "rabi" || command == "budget") used_seed.reset();
    }
    if (used_seed) digest_input += "seed=" + std::to_string(*used_seed) + "\n";
    const std::string json = summary_json(result.summary, config::digest_hex(config::fnv1a64(digest_input)), used_seed);

    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      write_atomically(std::filesystem::path(out_dir) / (result.name + ".csv"), result.csv);
      write_atomically(std::filesystem::path(out_dir) / (result.name + ".json"), json);
    }
    if (format == "csv") {
      std::cout << result.csv;
    } else {
      if (!result.table.empty()) std::cerr << result.table;
      std::cout << json;
    }
    for (const auto& w : result.summary.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace spsim::cli
