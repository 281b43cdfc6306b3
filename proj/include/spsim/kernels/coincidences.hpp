#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spsim/kernels/backend.hpp"

namespace spsim::kernels {

// Detection events grouped by time slot (pulse period). Slot i owns
// times[offsets[i] .. offsets[i+1]), each relative to the slot start.
struct DetectionStream {
  std::vector<std::size_t> offsets{0};
  std::vector<double> times;

  std::size_t slots() const { return offsets.size() - 1; }
  void push_slot(std::span<const double> slot_times);
};

// Bins centred on integer multiples of bin_ps: bin k holds delay (k - half_bins) * bin_ps.
struct HistogramGrid {
  double bin_ps = 0.0;
  double period_ps = 0.0;
  int half_bins = 0;

  std::size_t size() const { return static_cast<std::size_t>(2 * half_bins + 1); }
};

// Start-stop coincidences between every start event and every stop event at most
// `max_slot_offset` slots away; delay = (j - i) * period + t_stop - t_start.
void accumulate_coincidences_serial(const DetectionStream& start, const DetectionStream& stop,
                                    const HistogramGrid& grid, int max_slot_offset,
                                    std::span<std::uint64_t> counts);
void accumulate_coincidences_openmp(const DetectionStream& start, const DetectionStream& stop,
                                    const HistogramGrid& grid, int max_slot_offset,
                                    std::span<std::uint64_t> counts);

inline void accumulate_coincidences(Backend backend, const DetectionStream& start, const DetectionStream& stop,
                                    const HistogramGrid& grid, int max_slot_offset,
                                    std::span<std::uint64_t> counts) {
  if (backend == Backend::openmp)
    accumulate_coincidences_openmp(start, stop, grid, max_slot_offset, counts);
  else
    accumulate_coincidences_serial(start, stop, grid, max_slot_offset, counts);
}

}  // namespace spsim::kernels
