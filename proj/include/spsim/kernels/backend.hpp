#pragma once

namespace spsim::kernels {

// Every data-parallel kernel ships a serial reference and an OpenMP variant
// that must produce bit-identical output.
enum class Backend { serial, openmp };

// Sets the OpenMP thread count used by Backend::openmp (<= 0 keeps the default).
void set_thread_count(int threads);
int thread_count();

}  // namespace spsim::kernels
