#pragma once

#include <optional>
#include <span>

#include "spsim/dynamics/generator.hpp"

namespace spsim::dynamics::detail {

// Right-hand side over the augmented state
//   [ vec(X) (dim^2) | beta | N_H | N_V | N_bg ]
// where X is rho (or a quantum-regression operator), beta the displaced field of
// the driven mode, and N_* the running emission integrals.
class DrivenRhs {
 public:
  DrivenRhs(const Generator& gen, const std::optional<PulseSpec>& pulse, kernels::Backend backend);

  std::size_t size() const { return block_ + 4; }
  std::size_t beta_index() const { return block_; }
  std::size_t accumulator_index() const { return block_ + 1; }

  void operator()(double t, std::span<const cplx> y, std::span<cplx> dy) const;

  cplx laser(double t) const;
  double drive_coupling() const { return g_drive_; }

 private:
  const Generator* gen_;
  std::optional<PulseSpec> pulse_;
  kernels::Backend backend_;
  std::size_t block_;
  double g_drive_ = 0.0;
  cplx field_decay_{0.0, 0.0};  // i Delta_m + kappa_m / 2
  double amplitude_ = 0.0;
};

}  // namespace spsim::dynamics::detail
