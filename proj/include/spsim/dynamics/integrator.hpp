#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace spsim::dynamics {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double h_min = 1e-10;  // absolute floor (ps); smaller accepted steps count as underflow
  long max_steps = 20'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evaluations = 0;
};

// Adaptive Dormand-Prince 5(4) with FSAL and a PI step-size controller.
class Dopri5 {
 public:
  using cplx = std::complex<double>;
  using Rhs = std::function<void(double t, std::span<const cplx> y, std::span<cplx> dy)>;

  Dopri5(Rhs rhs, std::size_t n, OdeOptions options = {});

  // Integrates y from t to t_end, landing exactly on t_end. Throws NumericalError
  // on step-size underflow or step budget exhaustion.
  void advance(double& t, std::vector<cplx>& y, double t_end);

  // Forget the cached derivative; call after modifying y externally.
  void reset();

  const OdeStats& stats() const { return stats_; }

 private:
  double initial_step(double t, const std::vector<cplx>& y, double t_end);

  Rhs rhs_;
  std::size_t n_;
  OdeOptions opt_;
  OdeStats stats_;
  std::vector<cplx> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_;
  bool fsal_valid_ = false;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
};

}  // namespace spsim::dynamics
