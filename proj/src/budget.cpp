#include "spsim/budget.hpp"

#include <set>

#include "spsim/errors.hpp"

namespace spsim::budget {

void LossBudget::validate() const {
  std::set<std::string> names;
  for (const auto& s : stages) {
    require(!s.name.empty(), "budget stage names must be non-empty");
    require(s.efficiency > 0 && s.efficiency <= 1, "budget stage '" + s.name + "' must lie in (0,1]");
    require(names.insert(s.name).second, "duplicate budget stage '" + s.name + "'");
  }
  require(rep_rate_mhz > 0, "repetition rate must be positive");
  require(detector_efficiency > 0 && detector_efficiency <= 1, "detector efficiency must lie in (0,1]");
}

LossBudget LossBudget::with_stage(std::string name, double efficiency) const {
  LossBudget out = *this;
  out.stages.push_back({std::move(name), efficiency});
  out.validate();
  return out;
}

double chain_efficiency(const LossBudget& b) {
  b.validate();
  double product = 1.0;
  for (const auto& s : b.stages) product *= s.efficiency;
  return product;
}

double infer_missing_factor(const LossBudget& b, double target) {
  require(target > 0 && target <= 1, "target efficiency must lie in (0,1]");
  const double chain = chain_efficiency(b);
  if (target > chain) {
    throw ValidationError("target efficiency exceeds the current chain; the missing factor would exceed 1");
  }
  return target / chain;
}

double predict_count_rate(double source_per_pulse, const LossBudget& b) {
  require(source_per_pulse >= 0 && source_per_pulse <= 1, "source efficiency per pulse must lie in [0,1]");
  return b.rep_rate_mhz * 1e6 * source_per_pulse * chain_efficiency(b) * b.detector_efficiency;
}

std::vector<ReportRow> budget_report(const LossBudget& b) {
  b.validate();
  std::vector<ReportRow> rows;
  double cumulative = 1.0;
  for (const auto& s : b.stages) {
    cumulative *= s.efficiency;
    rows.push_back({s.name, s.efficiency, cumulative});
  }
  return rows;
}

}  // namespace spsim::budget
