#pragma once

#include <string>
#include <vector>

namespace spsim::budget {

struct Stage {
  std::string name;
  double efficiency = 1.0;  // in (0, 1]
};

// Ordered multiplicative efficiency chain from emitter to detector.
struct LossBudget {
  std::vector<Stage> stages;
  double rep_rate_mhz = 76.0;
  double detector_efficiency = 1.0;

  void validate() const;
  LossBudget with_stage(std::string name, double efficiency) const;
};

double chain_efficiency(const LossBudget& b);

// Factor that, appended to the chain, brings it down to `target`.
double infer_missing_factor(const LossBudget& b, double target);

// Detected counts per second: rep rate x per-pulse source efficiency x chain x detector.
double predict_count_rate(double source_per_pulse, const LossBudget& b);

struct ReportRow {
  std::string stage;
  double factor;
  double cumulative;
};

std::vector<ReportRow> budget_report(const LossBudget& b);

}  // namespace spsim::budget
