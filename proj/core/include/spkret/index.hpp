#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spkret/codebook.hpp"
#include "spkret/stats.hpp"

namespace spkret {

struct IndexRecord {
  std::string segment_id;
  std::string speaker_label;  // empty when absent
  SegmentHistogram histogram;
  SegmentStats stats;

  bool labeled() const { return !speaker_label.empty(); }
};

struct BuildConfig {
  int codebook_k = 0;
  std::uint64_t codebook_seed = 0;
  int per_segment = 0;
  double drop_db = 0.0;
};

/// Immutable collection of per-segment histograms and Gaussian statistics,
/// all quantized against one shared codebook. Safe for concurrent readers.
class RetrievalIndex {
 public:
  struct BuildOutcome;

  /// Computes histogram and stats for every segment. Segments with fewer
  /// than 2 frames are skipped and reported in the outcome. Duplicate
  /// segment ids throw DuplicateSegmentId.
  static BuildOutcome build(std::span<const FrameMatrix> segments, const Codebook& cb,
                            const std::map<std::string, std::string>* labels = nullptr,
                            int threads = 0, BuildConfig config = {});

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const IndexRecord& record(std::size_t i) const { return records_[i]; }
  const std::vector<IndexRecord>& records() const { return records_; }

  /// nullptr when the id is unknown.
  const IndexRecord* find(std::string_view id) const;

  int num_bins() const { return num_bins_; }
  int dim() const { return dim_; }
  bool all_labeled() const;
  const BuildConfig& config() const { return config_; }

  /// SPKIDX1 index file: 8-byte magic "SPKIDX1\0", little-endian
  /// u32 record count, u32 K, u32 D; per record: u32 id length + id bytes,
  /// u32 label length + label bytes (0 when absent), u32 nonzero-bin count
  /// then (u32 bin, f32 value) pairs, u64 n, D f64 mean values,
  /// D*D f64 covariance row-major.
  /// On load, histograms are renormalized to unit sum (they were rounded to
  /// 32-bit floats) and the stats sums are rebuilt from n, mean and cov.
  void save(const std::string& path) const;
  static RetrievalIndex load(const std::string& path);

 private:
  std::vector<IndexRecord> records_;
  std::unordered_map<std::string, std::size_t> by_id_;
  int num_bins_ = 0;
  int dim_ = 0;
  BuildConfig config_{};

  void finalize();  // builds the id map, validates uniqueness
};

struct RetrievalIndex::BuildOutcome {
  RetrievalIndex index;
  std::vector<std::string> skipped_segments;  // too few frames for stats
};

/// Labels TSV: one "segment_id<TAB>speaker_id" line per segment.
std::map<std::string, std::string> read_labels_tsv(const std::string& path);
void write_labels_tsv(const std::string& path,
                      const std::map<std::string, std::string>& labels);

}  // namespace spkret
