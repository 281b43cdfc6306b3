#include "spsim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "spsim/errors.hpp"
#include "spsim/units.hpp"

namespace spsim::config {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kSections{"cavity", "emitter",    "scenario",    "pulse",    "hilbert", "dynamics", "budget",
                                      "collection", "correlation", "lifetime", "rabi",    "sweep",    "run"};

class Section {
 public:
  Section(const pt::ptree* node, std::string name, std::string source)
      : node_(node), name_(std::move(name)), source_(std::move(source)) {}

  bool present() const { return node_ != nullptr; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ValidationError(source_ + ": [" + name_ + "] " + key + ": " + msg);
  }

  std::optional<std::string> text(const std::string& key) {
    if (!node_) return std::nullopt;
    const auto it = node_->find(key);
    if (it == node_->not_found()) return std::nullopt;
    used_.insert(key);
    return it->second.data();
  }

  double parse_number(const std::string& key, const std::string& s) const {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
      fail(key, "'" + s + "' is not a finite number");
    return v;
  }

  std::optional<double> number(const std::string& key) {
    const auto s = text(key);
    if (!s) return std::nullopt;
    return parse_number(key, *s);
  }

  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  double required(const std::string& key) {
    const auto v = number(key);
    if (!v) fail(key, "required key is missing");
    return *v;
  }

  int integer(const std::string& key, int fallback) {
    const auto v = number(key);
    if (!v) return fallback;
    if (*v != std::floor(*v) || std::abs(*v) > 2e9) fail(key, "expected an integer");
    return static_cast<int>(*v);
  }

  std::optional<std::uint64_t> unsigned_integer(const std::string& key) {
    const auto s = text(key);
    if (!s) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (s->empty() || ec != std::errc{} || ptr != s->data() + s->size()) fail(key, "expected a non-negative integer");
    return v;
  }

  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    const auto s = text(key);
    if (!s) return fallback;
    std::vector<double> out;
    std::stringstream ss(*s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      out.push_back(parse_number(key, b == std::string::npos ? std::string{} : item.substr(b, e - b + 1)));
    }
    if (out.empty()) fail(key, "list is empty");
    return out;
  }

  // Ordered stage.<name> = factor entries.
  std::vector<budget::Stage> stages() {
    std::vector<budget::Stage> out;
    if (!node_) return out;
    for (const auto& [key, child] : *node_) {
      if (key.rfind("stage.", 0) != 0) continue;
      used_.insert(key);
      const std::string name = key.substr(6);
      if (name.empty()) fail(key, "stage name is empty");
      out.push_back({name, parse_number(key, child.data())});
    }
    return out;
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [key, child] : *node_) {
      if (!child.empty()) fail(key, "nested keys are not supported");
      if (!used_.count(key)) fail(key, "unknown key");
    }
  }

 private:
  const pt::ptree* node_;
  std::string name_;
  std::string source_;
  std::set<std::string> used_;
};

template <class F>
void check(const Section& s, const std::string& key, F&& validate) {
  try {
    validate();
  } catch (const ValidationError& e) {
    s.fail(key, e.what());
  }
}

}  // namespace

dynamics::CoupledSystem RunConfig::coupled_system() const {
  require(has_cavity(), source + ": [cavity] section is required for dynamics");
  require(purcell_measured > 1.0, source + ": [scenario] purcell_measured is required for dynamics");
  return dynamics::system_for_measured_purcell(cavity, emitter, purcell_measured);
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  cfg.source = source;
  std::ostringstream canon;
  for (const auto& [name, section] : tree) {
    if (section.empty() && !section.data().empty())
      throw ValidationError(source + ": key '" + name + "' appears outside any section");
    if (!kSections.count(name)) throw ValidationError(source + ": unknown section [" + name + "]");
    for (const auto& [key, value] : section) canon << name << '.' << key << '=' << value.data() << '\n';
  }
  cfg.canonical = canon.str();

  auto section = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name, source);
  };

  Section cav = section("cavity");
  if (cav.present()) {
    cfg.cavity.lambda_H_nm = cav.required("lambda_H_nm");
    cfg.cavity.lambda_V_nm = cav.required("lambda_V_nm");
    auto linewidth = [&](const std::string& mode, double lambda) {
      const auto lw = cav.number("linewidth_" + mode + "_ghz");
      const auto q = cav.number("q_" + mode);
      if (lw.has_value() == q.has_value())
        cav.fail("linewidth_" + mode + "_ghz", "give exactly one of linewidth_" + mode + "_ghz and q_" + mode);
      if (q) {
        double out = 0;
        check(cav, "q_" + mode, [&] { out = model::linewidth_from_q(lambda, *q); });
        return out;
      }
      return *lw;
    };
    cfg.cavity.linewidth_H_ghz = linewidth("H", cfg.cavity.lambda_H_nm);
    cfg.cavity.linewidth_V_ghz = linewidth("V", cfg.cavity.lambda_V_nm);
    if (auto s = cav.text("label_H")) cfg.cavity.label_H = *s;
    if (auto s = cav.text("label_V")) cfg.cavity.label_V = *s;
    check(cav, "lambda_H_nm", [&] { cfg.cavity.validate(); });
  }
  cav.reject_unknown();

  Section em = section("emitter");
  cfg.emitter.lambda_nm = em.number("lambda_nm", cfg.cavity.lambda_H_nm);
  cfg.emitter.tau_bulk_ps = em.number("tau_bulk_ps", cfg.emitter.tau_bulk_ps);
  cfg.emitter.gamma_star_ghz = em.number("gamma_star_ghz", 0.0);
  cfg.emitter.eta_internal = em.number("eta_internal", 1.0);
  cfg.emitter.on_fraction = em.number("on_fraction", 1.0);
  if (cfg.has_cavity()) check(em, "tau_bulk_ps", [&] { cfg.emitter.validate(); });
  em.reject_unknown();

  Section sc = section("scenario");
  cfg.purcell_measured = sc.number("purcell_measured", 0.0);
  if (sc.present() && cfg.purcell_measured != 0.0 && !(cfg.purcell_measured > 1.0))
    sc.fail("purcell_measured", "must exceed 1");
  sc.reject_unknown();

  Section pu = section("pulse");
  cfg.pulse.fwhm_ps = pu.number("fwhm_ps", cfg.pulse.fwhm_ps);
  if (const auto a = pu.number("area_rad")) {
    cfg.pulse.area_rad = *a;
    cfg.calibrate_pi = false;
  }
  cfg.pulse.detuning_per_ps = units::angular_per_ps(pu.number("detuning_ghz", 0.0));
  cfg.pulse.rep_rate_mhz = pu.number("rep_rate_mhz", cfg.pulse.rep_rate_mhz);
  cfg.pulse.center_ps = pu.number("center_ps", 0.0);
  if (const auto p = pu.text("polarization")) {
    if (*p == "H") cfg.pulse.polarization = dynamics::Polarization::H;
    else if (*p == "V") cfg.pulse.polarization = dynamics::Polarization::V;
    else pu.fail("polarization", "expected H or V");
  }
  check(pu, "fwhm_ps", [&] { cfg.pulse.validate(); });
  pu.reject_unknown();

  Section hi = section("hilbert");
  cfg.hilbert.n_max_H = hi.integer("n_max_H", cfg.hilbert.n_max_H);
  cfg.hilbert.n_max_V = hi.integer("n_max_V", cfg.hilbert.n_max_V);
  check(hi, "n_max_H", [&] { cfg.hilbert.validate(); });
  hi.reject_unknown();

  Section dy = section("dynamics");
  cfg.numerics.rtol = dy.number("rtol", cfg.numerics.rtol);
  cfg.numerics.atol = dy.number("atol", cfg.numerics.atol);
  cfg.numerics.dt_out_ps = dy.number("dt_out_ps", cfg.numerics.dt_out_ps);
  cfg.horizon_lifetimes = dy.number("horizon_lifetimes", cfg.horizon_lifetimes);
  if (!(cfg.numerics.rtol > 0 && cfg.numerics.atol > 0)) dy.fail("rtol", "tolerances must be positive");
  if (!(cfg.numerics.dt_out_ps > 0)) dy.fail("dt_out_ps", "must be positive");
  if (!(cfg.horizon_lifetimes >= 5)) dy.fail("horizon_lifetimes", "must be at least 5");
  dy.reject_unknown();

  Section bu = section("budget");
  cfg.budget.stages = bu.stages();
  cfg.budget.rep_rate_mhz = cfg.pulse.rep_rate_mhz;
  cfg.budget_target = bu.number("target");
  check(bu, "stage", [&] { cfg.budget.validate(); });
  if (cfg.budget_target && !(*cfg.budget_target > 0 && *cfg.budget_target <= 1))
    bu.fail("target", "must lie in (0, 1]");
  bu.reject_unknown();

  Section co = section("collection");
  cfg.collection.stages = co.stages();
  cfg.collection.rep_rate_mhz = cfg.pulse.rep_rate_mhz;
  cfg.collection.detector_efficiency = co.number("detector_efficiency", 1.0);
  check(co, "stage", [&] { cfg.collection.validate(); });
  co.reject_unknown();

  Section cr = section("correlation");
  auto& c = cfg.correlation;
  if (const auto n = cr.unsigned_integer("n_pulses")) c.n_pulses = *n;
  if (c.n_pulses < 1) cr.fail("n_pulses", "must be at least 1");
  if (const auto g = cr.number("target_g2")) c.target_g2 = *g;
  c.leakage_prob = cr.number("leakage_prob");
  if (c.target_g2 && !(*c.target_g2 >= 0 && *c.target_g2 < 1)) cr.fail("target_g2", "must lie in [0, 1)");
  if (c.leakage_prob && !(*c.leakage_prob >= 0 && *c.leakage_prob <= 1)) cr.fail("leakage_prob", "must lie in [0, 1]");
  c.bins_per_period = cr.integer("bins_per_period", c.bins_per_period);
  c.side_peaks = cr.integer("side_peaks", c.side_peaks);
  c.reflectance = cr.number("reflectance", c.reflectance);
  c.hbt_reflectance = cr.number("hbt_reflectance", c.hbt_reflectance);
  c.detection_efficiency = cr.number("detection_efficiency", c.detection_efficiency);
  c.indistinguishability = cr.number("indistinguishability");
  c.g1_dt_ps = cr.number("g1_dt_ps", c.g1_dt_ps);
  if (c.bins_per_period < 2) cr.fail("bins_per_period", "must be at least 2");
  if (c.side_peaks < 6) cr.fail("side_peaks", "must be at least 6 (five usable side peaks beyond the nearest)");
  if (!(c.reflectance > 0 && c.reflectance < 1)) cr.fail("reflectance", "must lie in (0, 1)");
  if (!(c.hbt_reflectance > 0 && c.hbt_reflectance < 1)) cr.fail("hbt_reflectance", "must lie in (0, 1)");
  if (!(c.detection_efficiency > 0 && c.detection_efficiency <= 1))
    cr.fail("detection_efficiency", "must lie in (0, 1]");
  if (c.indistinguishability && !(*c.indistinguishability >= 0 && *c.indistinguishability <= 1))
    cr.fail("indistinguishability", "must lie in [0, 1]");
  if (!(c.g1_dt_ps > 0)) cr.fail("g1_dt_ps", "must be positive");
  cr.reject_unknown();

  Section lt = section("lifetime");
  cfg.lifetime.counts = lt.number("counts", cfg.lifetime.counts);
  cfg.lifetime.irf_fwhm_ps = lt.number("irf_fwhm_ps", cfg.lifetime.irf_fwhm_ps);
  cfg.lifetime.bin_ps = lt.number("bin_ps", cfg.lifetime.bin_ps);
  if (!(cfg.lifetime.counts >= 100)) lt.fail("counts", "must be at least 100");
  if (!(cfg.lifetime.irf_fwhm_ps >= 0)) lt.fail("irf_fwhm_ps", "must be non-negative");
  if (!(cfg.lifetime.bin_ps > 0)) lt.fail("bin_ps", "must be positive");
  lt.reject_unknown();

  Section ra = section("rabi");
  cfg.rabi.area_max_rad = ra.number("area_max_rad", cfg.rabi.area_max_rad);
  cfg.rabi.points = ra.integer("points", cfg.rabi.points);
  if (!(cfg.rabi.area_max_rad >= 2.0 * units::pi)) ra.fail("area_max_rad", "must cover at least 2 pi");
  if (cfg.rabi.points < 9) ra.fail("points", "need at least 9 points");
  ra.reject_unknown();

  Section sw = section("sweep");
  cfg.sweep.purcell_values = sw.list("purcell_values", cfg.sweep.purcell_values);
  cfg.sweep.ratio_min = sw.number("ratio_min", cfg.sweep.ratio_min);
  cfg.sweep.ratio_max = sw.number("ratio_max", cfg.sweep.ratio_max);
  cfg.sweep.ratio_step = sw.number("ratio_step", cfg.sweep.ratio_step);
  cfg.sweep.design_purcell = sw.number("design_purcell", cfg.sweep.design_purcell);
  cfg.sweep.design_ratio = sw.number("design_ratio", cfg.sweep.design_ratio);
  for (double f : cfg.sweep.purcell_values)
    if (!(f > 0)) sw.fail("purcell_values", "Purcell factors must be positive");
  if (!(cfg.sweep.ratio_min >= 0 && cfg.sweep.ratio_max >= cfg.sweep.ratio_min))
    sw.fail("ratio_max", "need 0 <= ratio_min <= ratio_max");
  if (!(cfg.sweep.ratio_step > 0)) sw.fail("ratio_step", "must be positive");
  if (!(cfg.sweep.design_purcell > 0)) sw.fail("design_purcell", "must be positive");
  if (!(cfg.sweep.design_ratio >= 0)) sw.fail("design_ratio", "must be non-negative");
  sw.reject_unknown();

  Section run = section("run");
  cfg.seed = run.unsigned_integer("seed");
  run.reject_unknown();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path);
  return parse_config(in, path);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spsim::config
