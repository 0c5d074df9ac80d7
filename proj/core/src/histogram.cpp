#include "spkret/histogram.hpp"

#include <cmath>

#include "kahan.hpp"

namespace spkret {

double SegmentHistogram::l1_norm() const {
  KahanSum s;
  for (const auto& e : entries) s.add(e.value);  // entries are non-negative
  return s.value();
}

double SegmentHistogram::l2_norm() const {
  KahanSum s;
  for (const auto& e : entries) s.add(e.value * e.value);
  return std::sqrt(s.value());
}

std::vector<double> SegmentHistogram::dense() const {
  std::vector<double> out(static_cast<std::size_t>(num_bins), 0.0);
  for (const auto& e : entries) out[e.bin] = e.value;
  return out;
}

SegmentHistogram SegmentHistogram::from_dense(std::string segment_id,
                                              const std::vector<double>& bins) {
  SegmentHistogram h;
  h.segment_id = std::move(segment_id);
  h.num_bins = static_cast<int>(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (bins[i] != 0.0) h.entries.push_back({static_cast<std::uint32_t>(i), bins[i]});
  }
  return h;
}

}  // namespace spkret
