#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "spsim/kernels/backend.hpp"

namespace spsim::kernels {

using cplx = std::complex<double>;

// Compressed sparse row matrix.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<cplx> values;

  std::size_t nnz() const { return values.size(); }
};

struct WeightedCsr {
  const CsrMatrix* matrix;
  cplx weight;
};

// out = sum_k weight_k * matrix_k * in. All matrices share one shape.
void apply_weighted_sum_serial(std::span<const WeightedCsr> terms, std::span<const cplx> in, std::span<cplx> out);
void apply_weighted_sum_openmp(std::span<const WeightedCsr> terms, std::span<const cplx> in, std::span<cplx> out);

inline void apply_weighted_sum(Backend backend, std::span<const WeightedCsr> terms, std::span<const cplx> in,
                               std::span<cplx> out) {
  if (backend == Backend::openmp)
    apply_weighted_sum_openmp(terms, in, out);
  else
    apply_weighted_sum_serial(terms, in, out);
}

}  // namespace spsim::kernels
