#include "spsim/kernels/coincidences.hpp"

#include <algorithm>
#include <cmath>

#include "spsim/errors.hpp"

namespace spsim::kernels {

void DetectionStream::push_slot(std::span<const double> slot_times) {
  times.insert(times.end(), slot_times.begin(), slot_times.end());
  offsets.push_back(times.size());
}

namespace {

void check(const DetectionStream& start, const DetectionStream& stop, const HistogramGrid& grid,
           std::span<std::uint64_t> counts) {
  require(start.slots() == stop.slots(), "start and stop streams must cover the same slots");
  require(grid.bin_ps > 0 && grid.period_ps > 0 && grid.half_bins > 0, "histogram grid is malformed");
  require(counts.size() == grid.size(), "count buffer does not match histogram grid");
}

inline void accumulate_slot(const DetectionStream& start, const DetectionStream& stop, const HistogramGrid& grid,
                            int max_slot_offset, long i, std::uint64_t* counts) {
  const long n_slots = static_cast<long>(start.slots());
  const long lo = std::max(0L, i - max_slot_offset);
  const long hi = std::min(n_slots - 1, i + max_slot_offset);
  const long n_bins = static_cast<long>(grid.size());
  for (std::size_t a = start.offsets[i]; a < start.offsets[i + 1]; ++a) {
    const double t_start = start.times[a];
    for (long j = lo; j <= hi; ++j) {
      const double base = static_cast<double>(j - i) * grid.period_ps - t_start;
      for (std::size_t b = stop.offsets[j]; b < stop.offsets[j + 1]; ++b) {
        const long k = std::lround((base + stop.times[b]) / grid.bin_ps) + grid.half_bins;
        if (k >= 0 && k < n_bins) ++counts[k];
      }
    }
  }
}

}  // namespace

void accumulate_coincidences_serial(const DetectionStream& start, const DetectionStream& stop,
                                    const HistogramGrid& grid, int max_slot_offset,
                                    std::span<std::uint64_t> counts) {
  check(start, stop, grid, counts);
  const long n_slots = static_cast<long>(start.slots());
  for (long i = 0; i < n_slots; ++i) accumulate_slot(start, stop, grid, max_slot_offset, i, counts.data());
}

void accumulate_coincidences_openmp(const DetectionStream& start, const DetectionStream& stop,
                                    const HistogramGrid& grid, int max_slot_offset,
                                    std::span<std::uint64_t> counts) {
  check(start, stop, grid, counts);
  const long n_slots = static_cast<long>(start.slots());
  const std::size_t n_bins = grid.size();
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(n_bins, 0);
#pragma omp for schedule(static)
    for (long i = 0; i < n_slots; ++i) accumulate_slot(start, stop, grid, max_slot_offset, i, local.data());
    // Integer sums are order-independent, so the reduction matches the serial result exactly.
#pragma omp critical
    for (std::size_t k = 0; k < n_bins; ++k) counts[k] += local[k];
  }
}

}  // namespace spsim::kernels
