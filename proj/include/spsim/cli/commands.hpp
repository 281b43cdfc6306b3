#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spsim/config.hpp"
#include "spsim/kernels/backend.hpp"

namespace spsim::cli {

struct Summary {
  std::string quantity;
  double value = 0.0;
  double uncertainty = 0.0;
  std::vector<std::pair<std::string, double>> details;
  std::vector<std::string> warnings;
};

struct CommandResult {
  std::string name;  // file stem for --out
  std::string csv;
  std::string table;  // optional human-readable rendering
  Summary summary;
};

struct RunContext {
  std::optional<std::uint64_t> seed;
  kernels::Backend backend = kernels::Backend::serial;
};

CommandResult cmd_sweep(const config::RunConfig& cfg);
CommandResult cmd_rabi(const config::RunConfig& cfg, const RunContext& ctx);
CommandResult cmd_lifetime(const config::RunConfig& cfg, const RunContext& ctx);
CommandResult cmd_g2(const config::RunConfig& cfg, const RunContext& ctx);
CommandResult cmd_hom(const config::RunConfig& cfg, const RunContext& ctx);
CommandResult cmd_budget(const config::RunConfig& cfg, std::optional<double> target);

struct FitRequest {
  std::string kind;  // doublet, dop, lifetime, g2, hom, localize
  std::vector<std::string> inputs;
  std::optional<double> reflectance;  // hom correction
  std::optional<double> g2;           // hom correction
};

CommandResult cmd_fit(const FitRequest& request);

// JSON summary with keys quantity, value, uncertainty, inputs_digest, seed,
// version, details and warnings.
std::string summary_json(const Summary& s, const std::string& digest, std::optional<std::uint64_t> seed);

// Entry point of the spsim executable; returns the process exit code
// (0 success, 1 invalid input, 2 numerical failure).
int run(int argc, char** argv);

}  // namespace spsim::cli
