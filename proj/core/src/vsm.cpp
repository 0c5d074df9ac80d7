#include "spkret/vsm.hpp"

#include <algorithm>
#include <cmath>

#include "kahan.hpp"
#include "spkret/errors.hpp"

namespace spkret {
namespace {

void check_bins(const SegmentHistogram& f, const SegmentHistogram& g) {
  if (f.num_bins != g.num_bins) {
    throw DimensionMismatch("histograms have " + std::to_string(f.num_bins) + " and " +
                            std::to_string(g.num_bins) + " bins");
  }
}

/// Merged walk over two sorted sparse histograms. Emits (fv, gv) for every
/// bin present in either, with 0 for the missing side. The visit order is
/// the bin order, identical for (f,g) and (g,f), so accumulations built on
/// top of it are exactly symmetric.
template <typename Fn>
void merge_bins(const SegmentHistogram& f, const SegmentHistogram& g, Fn&& fn) {
  std::size_t i = 0, j = 0;
  while (i < f.entries.size() && j < g.entries.size()) {
    const auto fb = f.entries[i].bin;
    const auto gb = g.entries[j].bin;
    if (fb == gb) {
      fn(f.entries[i].value, g.entries[j].value);
      ++i;
      ++j;
    } else if (fb < gb) {
      fn(f.entries[i].value, 0.0);
      ++i;
    } else {
      fn(0.0, g.entries[j].value);
      ++j;
    }
  }
  for (; i < f.entries.size(); ++i) fn(f.entries[i].value, 0.0);
  for (; j < g.entries.size(); ++j) fn(0.0, g.entries[j].value);
}

}  // namespace

bool vsm_is_similarity(VsmMetric m) { return m != VsmMetric::kNormalizedL2; }

std::string vsm_metric_name(VsmMetric m) {
  switch (m) {
    case VsmMetric::kCosine:
      return "cosine";
    case VsmMetric::kNormalizedL2:
      return "l2";
    case VsmMetric::kBhattacharyya:
      return "bhat";
    case VsmMetric::kHistogramIntersection:
      return "intersect";
  }
  return "?";
}

VsmMetric parse_vsm_metric(std::string_view name) {
  if (name == "cosine") return VsmMetric::kCosine;
  if (name == "l2") return VsmMetric::kNormalizedL2;
  if (name == "bhat") return VsmMetric::kBhattacharyya;
  if (name == "intersect") return VsmMetric::kHistogramIntersection;
  throw UsageError("unknown first-level metric '" + std::string(name) +
                   "' (expected cosine|l2|bhat|intersect)");
}

double cosine(const SegmentHistogram& f, const SegmentHistogram& g) {
  check_bins(f, g);
  const double nf = f.l2_norm();
  const double ng = g.l2_norm();
  if (nf == 0.0 || ng == 0.0) {
    throw ZeroVector("cosine of an all-zero histogram ('" + f.segment_id + "' vs '" +
                     g.segment_id + "')");
  }
  KahanSum dot;
  std::size_t i = 0, j = 0;
  while (i < f.entries.size() && j < g.entries.size()) {
    const auto fb = f.entries[i].bin;
    const auto gb = g.entries[j].bin;
    if (fb == gb) {
      dot.add(f.entries[i].value * g.entries[j].value);
      ++i;
      ++j;
    } else if (fb < gb) {
      ++i;
    } else {
      ++j;
    }
  }
  return dot.value() / (nf * ng);
}

double normalized_l2(const SegmentHistogram& f, const SegmentHistogram& g) {
  check_bins(f, g);
  const double nf = f.l2_norm();
  const double ng = g.l2_norm();
  if (nf == 0.0 || ng == 0.0) {
    throw ZeroVector("normalized L2 of an all-zero histogram ('" + f.segment_id + "' vs '" +
                     g.segment_id + "')");
  }
  KahanSum sum;
  merge_bins(f, g, [&](double fv, double gv) {
    const double d = fv / nf - gv / ng;
    sum.add(d * d);
  });
  return sum.value();
}

double bhattacharyya(const SegmentHistogram& f, const SegmentHistogram& g) {
  check_bins(f, g);
  KahanSum sum;
  std::size_t i = 0, j = 0;
  while (i < f.entries.size() && j < g.entries.size()) {
    const auto fb = f.entries[i].bin;
    const auto gb = g.entries[j].bin;
    if (fb == gb) {
      sum.add(std::sqrt(f.entries[i].value * g.entries[j].value));
      ++i;
      ++j;
    } else if (fb < gb) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum.value();
}

double histogram_intersection(const SegmentHistogram& f, const SegmentHistogram& g) {
  check_bins(f, g);
  const double denom = std::min(f.l1_norm(), g.l1_norm());
  if (denom == 0.0) return 0.0;
  KahanSum sum;
  std::size_t i = 0, j = 0;
  while (i < f.entries.size() && j < g.entries.size()) {
    const auto fb = f.entries[i].bin;
    const auto gb = g.entries[j].bin;
    if (fb == gb) {
      sum.add(std::min(f.entries[i].value, g.entries[j].value));
      ++i;
      ++j;
    } else if (fb < gb) {
      ++i;
    } else {
      ++j;
    }
  }
  return sum.value() / denom;
}

double vsm_score(VsmMetric m, const SegmentHistogram& f, const SegmentHistogram& g) {
  switch (m) {
    case VsmMetric::kCosine:
      return cosine(f, g);
    case VsmMetric::kNormalizedL2:
      return normalized_l2(f, g);
    case VsmMetric::kBhattacharyya:
      return bhattacharyya(f, g);
    case VsmMetric::kHistogramIntersection:
      return histogram_intersection(f, g);
  }
  throw UsageError("unhandled first-level metric");
}

CandidateList top_k(const SegmentHistogram& query, std::span<const SegmentHistogram> index,
                    int k, VsmMetric metric, std::string_view exclude_id) {
  if (index.empty()) throw EmptyIndex("first-level search over an empty index");
  if (k < 1) throw UsageError("k must be at least 1");

  CandidateList scored;
  scored.reserve(index.size());
  for (const auto& h : index) {
    if (h.segment_id == exclude_id) continue;
    scored.push_back({h.segment_id, vsm_score(metric, query, h), false});
  }

  const bool sim = vsm_is_similarity(metric);
  auto closer = [sim](const ScoredSegment& a, const ScoredSegment& b) {
    if (a.score != b.score) return sim ? a.score > b.score : a.score < b.score;
    return a.segment_id < b.segment_id;
  };
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), closer);
  scored.resize(keep);
  return scored;
}

}  // namespace spkret
