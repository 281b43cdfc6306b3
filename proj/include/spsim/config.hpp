#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spsim/budget.hpp"
#include "spsim/dynamics/evolution.hpp"
#include "spsim/model.hpp"

// Run configuration read from an INI file. Every physical key carries its unit
// as a suffix (tau_bulk_ps, rep_rate_mhz, ...). Sections:
//   [cavity] [emitter] [scenario] [pulse] [hilbert] [dynamics] [budget]
//   [collection] [correlation] [lifetime] [rabi] [sweep] [run]
// Unknown sections or keys are rejected so that typos never pass silently.
namespace spsim::config {

struct CorrelationConfig {
  std::uint64_t n_pulses = 1'000'000;
  std::optional<double> target_g2 = 0.025;  // sets the leakage mean
  std::optional<double> leakage_prob;       // explicit leakage mean, overrides target_g2
  int bins_per_period = 800;
  int side_peaks = 8;
  double reflectance = 0.5;
  double hbt_reflectance = 0.5;
  double detection_efficiency = 1.0;
  std::optional<double> indistinguishability;  // skips the G1 computation when set
  double g1_dt_ps = 1.0;
};

struct LifetimeConfig {
  double counts = 1e6;
  double irf_fwhm_ps = 20.0;
  double bin_ps = 2.0;
};

struct RabiConfig {
  double area_max_rad = 3.0 * 3.141592653589793;
  int points = 61;
};

struct SweepConfig {
  std::vector<double> purcell_values{5.0, 10.0, 20.0, 30.0};
  double ratio_min = 0.0;
  double ratio_max = 5.0;
  double ratio_step = 0.1;
  double design_purcell = 20.0;
  double design_ratio = 3.0;
};

struct RunConfig {
  std::string source = "<config>";
  model::CavitySpec cavity;
  model::EmitterSpec emitter;
  double purcell_measured = 0.0;  // lifetime shortening tau_bulk / tau_cavity
  dynamics::PulseSpec pulse;
  bool calibrate_pi = true;  // pulse area searched numerically unless area_rad is given
  dynamics::HilbertConfig hilbert;
  dynamics::EvolveOptions numerics;
  double horizon_lifetimes = 12.0;
  budget::LossBudget budget;      // source efficiency chain up to the first lens
  budget::LossBudget collection;  // optics path and detector
  std::optional<double> budget_target;
  CorrelationConfig correlation;
  LifetimeConfig lifetime;
  RabiConfig rabi;
  SweepConfig sweep;
  std::optional<std::uint64_t> seed;
  std::string canonical;  // normalized key=value listing used for input digests

  bool has_cavity() const { return cavity.lambda_H_nm > 0; }
  dynamics::CoupledSystem coupled_system() const;
};

RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

// 64-bit FNV-1a, rendered as 16 hex digits by digest_hex.
std::uint64_t fnv1a64(std::string_view data);
std::string digest_hex(std::uint64_t h);

}  // namespace spsim::config
