#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spkret {

/// Normalized codebook-bin occupancy distribution for one segment.
/// Stored sparse: only nonzero bins, sorted by bin index ascending.
/// Invariant: values > 0 and sum to 1 within 1e-9.
struct SegmentHistogram {
  struct Entry {
    std::uint32_t bin;
    double value;
  };

  std::string segment_id;
  int num_bins = 0;  // K
  std::vector<Entry> entries;

  double l1_norm() const;
  double l2_norm() const;

  std::vector<double> dense() const;
  static SegmentHistogram from_dense(std::string segment_id, const std::vector<double>& bins);
};

}  // namespace spkret
