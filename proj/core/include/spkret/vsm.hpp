#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spkret/histogram.hpp"

namespace spkret {

/// First-level vector-space measures over normalized histograms.
/// Cosine, Bhattacharyya and intersection are similarities (higher = closer);
/// the normalized L2 distance is a dissimilarity (lower = closer).
enum class VsmMetric { kCosine, kNormalizedL2, kBhattacharyya, kHistogramIntersection };

bool vsm_is_similarity(VsmMetric m);
std::string vsm_metric_name(VsmMetric m);
VsmMetric parse_vsm_metric(std::string_view name);  // cosine|l2|bhat|intersect

/// sum_j f_j * g_j / (||f||_2 * ||g||_2); in [0,1] for non-negative input.
/// Throws ZeroVector when either histogram is all-zero.
double cosine(const SegmentHistogram& f, const SegmentHistogram& g);

/// sum_j (f_j/||f||_2 - g_j/||g||_2)^2; in [0,2]; equals 2*(1 - cosine).
double normalized_l2(const SegmentHistogram& f, const SegmentHistogram& g);

/// sum_j sqrt(f_j * g_j); in [0,1] for normalized input.
double bhattacharyya(const SegmentHistogram& f, const SegmentHistogram& g);

/// sum_j min(f_j, g_j) / min(||f||_1, ||g||_1); in [0,1].
double histogram_intersection(const SegmentHistogram& f, const SegmentHistogram& g);

double vsm_score(VsmMetric m, const SegmentHistogram& f, const SegmentHistogram& g);

/// One ranked retrieval result.
struct ScoredSegment {
  std::string segment_id;
  double score = 0.0;
  bool flagged = false;  // scoring failed; ranked after all scored candidates
};
using CandidateList = std::vector<ScoredSegment>;

/// Exhaustively scores every histogram except the one matching exclude_id,
/// orders by metric orientation with ties broken by ascending segment id,
/// and truncates to k. Throws EmptyIndex when index is empty.
CandidateList top_k(const SegmentHistogram& query, std::span<const SegmentHistogram> index,
                    int k, VsmMetric metric, std::string_view exclude_id);

}  // namespace spkret
