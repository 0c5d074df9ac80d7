#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkret/index.hpp"

namespace spkret {

/// First-level search over the index records; same contract as the
/// span-based top_k. Throws EmptyIndex when no non-query candidate exists.
CandidateList top_k(const SegmentHistogram& query, const RetrievalIndex& index, int k,
                    VsmMetric metric);

struct RetrieveConfig {
  int k1 = 50;
  VsmMetric metric1 = VsmMetric::kHistogramIntersection;
  SoConfig so{};
  int n = 5;
};

/// Two-level retrieval: first-level top-k1 pruning on histograms, then
/// second-order rerank of the surviving candidates; returns the first n.
/// The query segment itself is never a candidate.
CandidateList retrieve(const RetrievalIndex& index, std::string_view query_id,
                       const RetrieveConfig& cfg);

/// Same, for a query segment that is not part of the index. The codebook
/// must be the one the index was built with.
CandidateList retrieve(const RetrievalIndex& index, const FrameMatrix& query,
                       const Codebook& cb, const RetrieveConfig& cfg);

struct EvalConfig {
  int k1 = 50;
  VsmMetric metric1 = VsmMetric::kHistogramIntersection;
  SoConfig so{};
  std::vector<int> n_values = {1, 3, 5};
  int threads = 0;  // 0 = all cores
};

/// Accuracy and timing of one (metric1, metric2) pair over the whole index,
/// every segment used once as a query.
struct EvalRow {
  VsmMetric metric1 = VsmMetric::kHistogramIntersection;
  SoMetric metric2 = SoMetric::kDeltaBic;
  double lambda = kDefaultLambda;
  double ridge = kDefaultRidge;
  int k1 = 50;

  std::vector<int> n_values;
  std::vector<int> hits;         // queries with >= 1 same-speaker among n-best
  std::vector<double> accuracy;  // hits / queries
  int recall_hits = 0;           // queries with >= 1 same-speaker in level-1 k1
  double recall_at_k1 = 0.0;

  double level1_seconds = 0.0;
  double level2_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Leave-one-in evaluation: each labeled segment queries the rest; a query
/// counts as a hit at n when any of its n best shares the speaker label.
/// Throws MissingLabels unless every record is labeled. Results are
/// independent of the thread count.
EvalRow evaluate_pair(const RetrievalIndex& index, const EvalConfig& cfg);

/// Brute-force second-order-only evaluation (no first level): the
/// quadratic baseline the two-level pipeline is measured against.
struct BaselineResult {
  std::vector<int> n_values;
  std::vector<int> hits;
  std::vector<double> accuracy;
  double seconds = 0.0;
};
BaselineResult brute_force_eval(const RetrievalIndex& index, const SoConfig& so,
                                std::vector<int> n_values, int threads = 0);

/// Corpus duration reconstructed from retained frame counts at the 10 ms
/// hop (25 ms window). A lower bound when low-energy frames were dropped.
double approx_audio_seconds(const RetrievalIndex& index);

/// audio seconds / retrieval seconds; absent for zero-duration corpora.
std::optional<double> speed_ratio(double audio_seconds, double retrieval_seconds);

/// Evaluation report over one or more metric pairs.
struct EvalReport {
  std::vector<EvalRow> rows;
  int query_count = 0;
  double total_audio_seconds = 0.0;
  int threads = 0;
  std::optional<BaselineResult> baseline;

  /// Aligned human-readable table, one row per metric pair.
  std::string text_table() const;
  /// Machine-readable CSV with the same rows.
  std::string csv() const;
};

/// Runs evaluate_pair for every (metric1, metric2) combination.
EvalReport evaluate(const RetrievalIndex& index, std::span<const VsmMetric> metrics1,
                    std::span<const SoMetric> metrics2, const EvalConfig& base,
                    bool with_baseline = false);

}  // namespace spkret
