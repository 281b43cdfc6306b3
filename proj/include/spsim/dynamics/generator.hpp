#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <complex>
#include <span>
#include <vector>

#include "spsim/dynamics/system.hpp"
#include "spsim/kernels/sparse_apply.hpp"

namespace spsim::dynamics {

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx>;
using DenseOp = Eigen::MatrixXcd;

// Ladder operators on the truncated emitter (x) H (x) V space.
struct Operators {
  SparseOp sigma_minus;
  SparseOp a;  // H mode
  SparseOp b;  // V mode
  SparseOp identity;
};

Operators make_operators(const HilbertConfig& cfg);

// Lindblad generator acting on column-major vec(rho):
//   H = delta_V b'b + g_H (a' s- + s+ a) + g_V (b' s- + s+ b) + drive
//   jumps sqrt(kappa_H) a, sqrt(kappa_V) b, sqrt(gamma0) s-, sqrt(2 gamma*) s+s-.
// The drive is the displaced-frame field of the driven cavity mode; the emitter
// sees g_m (beta s+ + beta* s-), split into the real and imaginary parts of beta.
class Generator {
 public:
  Generator(const CoupledSystem& sys, const HilbertConfig& cfg);

  int dim() const { return dim_; }
  const CoupledSystem& system() const { return sys_; }
  const HilbertConfig& config() const { return cfg_; }
  const Operators& operators() const { return ops_; }

  const kernels::CsrMatrix& static_part() const { return static_; }
  const kernels::CsrMatrix& drive_real() const { return drive_re_; }
  const kernels::CsrMatrix& drive_imag() const { return drive_im_; }

  // out = L(drive) in, where drive = g_m * beta is the emitter Rabi half-frequency.
  void apply(cplx drive, std::span<const cplx> in, std::span<cplx> out, kernels::Backend backend) const;

  // Diagonal occupation numbers per basis index.
  std::span<const double> excited() const { return excited_; }
  std::span<const double> photons_H() const { return n_H_; }
  std::span<const double> photons_V() const { return n_V_; }

 private:
  CoupledSystem sys_;
  HilbertConfig cfg_;
  int dim_;
  Operators ops_;
  kernels::CsrMatrix static_;
  kernels::CsrMatrix drive_re_;
  kernels::CsrMatrix drive_im_;
  std::vector<double> excited_;
  std::vector<double> n_H_;
  std::vector<double> n_V_;
};

Generator build_generator(const CoupledSystem& sys, const HilbertConfig& cfg);

DenseOp ground_state(const HilbertConfig& cfg);
DenseOp excited_state(const HilbertConfig& cfg);

// Dense superoperator matrix (testing and small-system diagnostics).
DenseOp dense_superoperator(const kernels::CsrMatrix& m);

}  // namespace spsim::dynamics
