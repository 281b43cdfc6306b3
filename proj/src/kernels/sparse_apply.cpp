#include "spsim/kernels/sparse_apply.hpp"

#include <omp.h>

#include "spsim/errors.hpp"

namespace spsim::kernels {

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int thread_count() { return omp_get_max_threads(); }

namespace {

void check_shapes(std::span<const WeightedCsr> terms, std::span<const cplx> in, std::span<cplx> out) {
  require(!terms.empty(), "weighted sum needs at least one matrix");
  const CsrMatrix& first = *terms.front().matrix;
  for (const auto& t : terms) require(t.matrix->rows == first.rows && t.matrix->cols == first.cols, "shape mismatch");
  require(in.size() == static_cast<std::size_t>(first.cols) && out.size() == static_cast<std::size_t>(first.rows),
          "vector length does not match matrix shape");
}

inline cplx row_value(std::span<const WeightedCsr> terms, std::span<const cplx> in, int row) {
  cplx acc{0.0, 0.0};
  for (const auto& t : terms) {
    if (t.weight == cplx{0.0, 0.0}) continue;
    const CsrMatrix& m = *t.matrix;
    cplx partial{0.0, 0.0};
    for (int k = m.row_ptr[row]; k < m.row_ptr[row + 1]; ++k) partial += m.values[k] * in[m.col_idx[k]];
    acc += t.weight * partial;
  }
  return acc;
}

}  // namespace

void apply_weighted_sum_serial(std::span<const WeightedCsr> terms, std::span<const cplx> in, std::span<cplx> out) {
  check_shapes(terms, in, out);
  const int rows = terms.front().matrix->rows;
  for (int i = 0; i < rows; ++i) out[i] = row_value(terms, in, i);
}

void apply_weighted_sum_openmp(std::span<const WeightedCsr> terms, std::span<const cplx> in, std::span<cplx> out) {
  check_shapes(terms, in, out);
  const int rows = terms.front().matrix->rows;
  // Below a few thousand rows the fork/join costs more than the work.
#pragma omp parallel for schedule(static) if (rows >= 4096)
  for (int i = 0; i < rows; ++i) out[i] = row_value(terms, in, i);
}

}  // namespace spsim::kernels
