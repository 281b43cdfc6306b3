#include "spsim/dynamics/detection.hpp"

#include <algorithm>
#include <random>

#include "spsim/errors.hpp"
#include "spsim/kernels/coincidences.hpp"

namespace spsim::dynamics {

using estimators::CoincidenceHistogram;
using kernels::Channel;
using kernels::Photon;

void CoincidenceSetup::validate() const {
  require(bins_per_period >= 2, "need at least two bins per period");
  require(side_peaks >= 1, "need at least one side peak");
  require(reflectance > 0 && reflectance < 1, "splitter reflectance must lie in (0, 1)");
  require(detection_efficiency > 0 && detection_efficiency <= 1, "detection efficiency must lie in (0, 1]");
  require(!detected.empty(), "no detected channel selected");
}

namespace {

bool is_detected(const CoincidenceSetup& s, Channel c) {
  return std::find(s.detected.begin(), s.detected.end(), c) != s.detected.end();
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream, 0x5eedu};
  return std::mt19937_64(seq);
}

CoincidenceHistogram histogram_from(const kernels::DetectionStream& d1, const kernels::DetectionStream& d2,
                                    double period, const CoincidenceSetup& setup, kernels::Backend backend) {
  kernels::HistogramGrid grid;
  grid.period_ps = period;
  grid.bin_ps = period / setup.bins_per_period;
  grid.half_bins = setup.side_peaks * setup.bins_per_period + setup.bins_per_period / 2;
  std::vector<std::uint64_t> counts(grid.size(), 0);
  kernels::accumulate_coincidences(backend, d1, d2, grid, setup.side_peaks + 1, counts);
  CoincidenceHistogram h;
  h.bin_ps = grid.bin_ps;
  h.rep_period_ps = period;
  h.half_bins = grid.half_bins;
  h.counts.assign(counts.begin(), counts.end());
  return h;
}

// Photons of each pulse as a contiguous range of the (pulse-ordered) record list.
template <class F>
void for_each_pulse(const PhotonRecords& records, F&& f) {
  std::size_t k = 0;
  const auto& ph = records.photons;
  for (std::uint64_t p = 0; p < records.n_pulses; ++p) {
    const std::size_t begin = k;
    while (k < ph.size() && ph[k].pulse == p) ++k;
    f(p, std::span<const Photon>(ph.data() + begin, k - begin));
  }
  require(k == ph.size(), "photon records are not ordered by pulse");
}

}  // namespace

CoincidenceHistogram hbt_histogram(const PhotonRecords& records, const CoincidenceSetup& setup, std::uint64_t seed,
                                   kernels::Backend backend) {
  setup.validate();
  require(records.rep_period_ps > 0, "records carry no repetition period");
  auto rng = make_engine(seed, 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  kernels::DetectionStream d1, d2;
  std::vector<double> t1, t2;
  for_each_pulse(records, [&](std::uint64_t, std::span<const Photon> photons) {
    t1.clear();
    t2.clear();
    for (const Photon& p : photons) {
      if (!is_detected(setup, p.channel)) continue;
      const bool first = u(rng) < setup.reflectance;
      if (u(rng) >= setup.detection_efficiency) continue;
      (first ? t1 : t2).push_back(p.time_ps);
    }
    d1.push_slot(t1);
    d2.push_slot(t2);
  });
  return histogram_from(d1, d2, records.rep_period_ps, setup, backend);
}

namespace {

CoincidenceHistogram hom_one(const PhotonRecords& records, double overlap, const CoincidenceSetup& setup,
                             std::uint64_t seed, std::uint32_t stream, kernels::Backend backend) {
  auto rng = make_engine(seed, stream);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double R = setup.reflectance, T = 1.0 - R;
  const double p_coinc = (R - T) * (R - T);

  kernels::DetectionStream d1, d2;
  std::vector<Photon> port_a, port_b, carry;
  std::vector<double> t1, t2;

  auto detect = [&](bool to_first, double t) {
    if (u(rng) < setup.detection_efficiency) (to_first ? t1 : t2).push_back(t);
  };
  auto flush_slot = [&]() {
    t1.clear();
    t2.clear();
    auto first_signal = [](const std::vector<Photon>& v) {
      return std::find_if(v.begin(), v.end(), [](const Photon& p) { return p.channel == Channel::H; });
    };
    auto ia = first_signal(port_a);
    auto ib = first_signal(port_b);
    std::ptrdiff_t skip_a = -1, skip_b = -1;
    if (ia != port_a.end() && ib != port_b.end() && u(rng) < overlap) {
      skip_a = ia - port_a.begin();
      skip_b = ib - port_b.begin();
      const double v = u(rng);
      if (v < p_coinc) {
        const bool a_first = u(rng) < 0.5;
        detect(a_first, ia->time_ps);
        detect(!a_first, ib->time_ps);
      } else {
        const bool both_first = u(rng) < 0.5;
        detect(both_first, ia->time_ps);
        detect(both_first, ib->time_ps);
      }
    }
    for (std::size_t i = 0; i < port_a.size(); ++i)
      if (static_cast<std::ptrdiff_t>(i) != skip_a) detect(u(rng) < R, port_a[i].time_ps);
    for (std::size_t i = 0; i < port_b.size(); ++i)
      if (static_cast<std::ptrdiff_t>(i) != skip_b) detect(u(rng) < T, port_b[i].time_ps);
    std::sort(t1.begin(), t1.end());
    std::sort(t2.begin(), t2.end());
    d1.push_slot(t1);
    d2.push_slot(t2);
  };

  for_each_pulse(records, [&](std::uint64_t, std::span<const Photon> photons) {
    port_a.clear();
    port_b.swap(carry);
    carry.clear();
    for (const Photon& p : photons) {
      if (!is_detected(setup, p.channel)) continue;
      (u(rng) < 0.5 ? port_a : carry).push_back(p);
    }
    flush_slot();
  });
  port_a.clear();
  port_b.swap(carry);
  flush_slot();
  return histogram_from(d1, d2, records.rep_period_ps, setup, backend);
}

}  // namespace

HomHistograms hom_histograms(const PhotonRecords& records, double overlap, const CoincidenceSetup& setup,
                             std::uint64_t seed, kernels::Backend backend) {
  setup.validate();
  require(overlap >= 0 && overlap <= 1, "photon overlap must lie in [0, 1]");
  require(records.rep_period_ps > 0, "records carry no repetition period");
  HomHistograms out;
  out.parallel = hom_one(records, overlap, setup, seed, 2, backend);
  out.cross = hom_one(records, 0.0, setup, seed, 3, backend);
  return out;
}

}  // namespace spsim::dynamics
