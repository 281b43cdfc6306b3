#include "spsim/dynamics/generator.hpp"

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "spsim/errors.hpp"

namespace spsim::dynamics {

namespace {

SparseOp identity(int n) {
  SparseOp id(n, n);
  id.setIdentity();
  return id;
}

SparseOp annihilation(int n_max) {
  SparseOp a(n_max + 1, n_max + 1);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int n = 1; n <= n_max; ++n) t.emplace_back(n - 1, n, std::sqrt(static_cast<double>(n)));
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SparseOp kron3(const SparseOp& x, const SparseOp& y, const SparseOp& z) {
  SparseOp xy = Eigen::kroneckerProduct(x, y);
  SparseOp xyz = Eigen::kroneckerProduct(xy, z);
  return xyz;
}

// -i [H, .] on column-major vec: -i (I (x) H - H^T (x) I)
SparseOp commutator_super(const SparseOp& h) {
  const SparseOp id = identity(static_cast<int>(h.rows()));
  SparseOp left = Eigen::kroneckerProduct(id, h);
  SparseOp ht = h.transpose();
  SparseOp right = Eigen::kroneckerProduct(ht, id);
  SparseOp out = (left - right) * cplx{0.0, -1.0};
  return out;
}

// D[c] rho = c rho c' - 1/2 {c'c, rho}
SparseOp dissipator_super(const SparseOp& c) {
  const SparseOp id = identity(static_cast<int>(c.rows()));
  SparseOp cdag = c.adjoint();
  SparseOp cdc = cdag * c;
  SparseOp cconj = c.conjugate();
  SparseOp jump = Eigen::kroneckerProduct(cconj, c);
  SparseOp left = Eigen::kroneckerProduct(id, cdc);
  SparseOp cdct = cdc.transpose();
  SparseOp right = Eigen::kroneckerProduct(cdct, id);
  SparseOp out = jump - (left + right) * cplx{0.5, 0.0};
  return out;
}

kernels::CsrMatrix to_csr(const SparseOp& m) {
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> r = m;
  r.prune(cplx{0.0, 0.0}, 0.0);
  r.makeCompressed();
  kernels::CsrMatrix out;
  out.rows = static_cast<int>(r.rows());
  out.cols = static_cast<int>(r.cols());
  out.row_ptr.assign(r.outerIndexPtr(), r.outerIndexPtr() + r.rows() + 1);
  out.col_idx.assign(r.innerIndexPtr(), r.innerIndexPtr() + r.nonZeros());
  out.values.assign(r.valuePtr(), r.valuePtr() + r.nonZeros());
  return out;
}

}  // namespace

Operators make_operators(const HilbertConfig& cfg) {
  cfg.validate();
  const SparseOp sm = annihilation(1);  // |g><e|
  const SparseOp id2 = identity(2);
  const SparseOp idH = identity(cfg.n_max_H + 1);
  const SparseOp idV = identity(cfg.n_max_V + 1);
  Operators ops;
  ops.sigma_minus = kron3(sm, idH, idV);
  ops.a = kron3(id2, annihilation(cfg.n_max_H), idV);
  ops.b = kron3(id2, idH, annihilation(cfg.n_max_V));
  ops.identity = identity(cfg.dim());
  return ops;
}

Generator::Generator(const CoupledSystem& sys, const HilbertConfig& cfg)
    : sys_(sys), cfg_(cfg), dim_(cfg.dim()), ops_(make_operators(cfg)) {
  sys_.validate();
  const SparseOp& sm = ops_.sigma_minus;
  const SparseOp sp = sm.adjoint();
  const SparseOp& a = ops_.a;
  const SparseOp& b = ops_.b;
  const SparseOp ad = a.adjoint();
  const SparseOp bd = b.adjoint();

  SparseOp h = (bd * b) * cplx{sys_.delta_V, 0.0};
  h += (ad * sm + sp * a) * cplx{sys_.g_H, 0.0};
  h += (bd * sm + sp * b) * cplx{sys_.g_V, 0.0};

  SparseOp l = commutator_super(h);
  if (sys_.kappa_H > 0) l += dissipator_super(a * cplx{std::sqrt(sys_.kappa_H), 0.0});
  if (sys_.kappa_V > 0) l += dissipator_super(b * cplx{std::sqrt(sys_.kappa_V), 0.0});
  if (sys_.gamma0 > 0) l += dissipator_super(sm * cplx{std::sqrt(sys_.gamma0), 0.0});
  if (sys_.gamma_star > 0) l += dissipator_super((sp * sm) * cplx{std::sqrt(2.0 * sys_.gamma_star), 0.0});
  static_ = to_csr(l);

  // drive = d: d s+ + d* s- = Re(d) (s+ + s-) + Im(d) i (s+ - s-)
  const SparseOp x = sp + sm;
  const SparseOp y = (sp - sm) * cplx{0.0, 1.0};
  drive_re_ = to_csr(commutator_super(x));
  drive_im_ = to_csr(commutator_super(y));

  const int per_emitter = (cfg.n_max_H + 1) * (cfg.n_max_V + 1);
  excited_.resize(dim_);
  n_H_.resize(dim_);
  n_V_.resize(dim_);
  for (int i = 0; i < dim_; ++i) {
    excited_[i] = i >= per_emitter ? 1.0 : 0.0;
    const int rest = i % per_emitter;
    n_H_[i] = rest / (cfg.n_max_V + 1);
    n_V_[i] = rest % (cfg.n_max_V + 1);
  }
}

void Generator::apply(cplx drive, std::span<const cplx> in, std::span<cplx> out, kernels::Backend backend) const {
  const kernels::WeightedCsr terms[] = {
      {&static_, cplx{1.0, 0.0}},
      {&drive_re_, cplx{drive.real(), 0.0}},
      {&drive_im_, cplx{drive.imag(), 0.0}},
  };
  kernels::apply_weighted_sum(backend, terms, in, out);
}

Generator build_generator(const CoupledSystem& sys, const HilbertConfig& cfg) { return Generator(sys, cfg); }

DenseOp ground_state(const HilbertConfig& cfg) {
  cfg.validate();
  DenseOp rho = DenseOp::Zero(cfg.dim(), cfg.dim());
  rho(0, 0) = 1.0;
  return rho;
}

DenseOp excited_state(const HilbertConfig& cfg) {
  cfg.validate();
  DenseOp rho = DenseOp::Zero(cfg.dim(), cfg.dim());
  const int e = (cfg.n_max_H + 1) * (cfg.n_max_V + 1);
  rho(e, e) = 1.0;
  return rho;
}

DenseOp dense_superoperator(const kernels::CsrMatrix& m) {
  DenseOp out = DenseOp::Zero(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) out(i, m.col_idx[k]) += m.values[k];
  return out;
}

}  // namespace spsim::dynamics
