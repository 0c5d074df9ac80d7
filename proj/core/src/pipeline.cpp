#include "spkret/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "parallel.hpp"
#include "spkret/errors.hpp"

namespace spkret {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void order_candidates(CandidateList& scored, bool similarity, std::size_t keep) {
  auto closer = [similarity](const ScoredSegment& a, const ScoredSegment& b) {
    if (a.flagged != b.flagged) return !a.flagged;
    if (!a.flagged && a.score != b.score) {
      return similarity ? a.score > b.score : a.score < b.score;
    }
    return a.segment_id < b.segment_id;
  };
  keep = std::min(keep, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), closer);
  scored.resize(keep);
}

CandidateList level1_candidates(const RetrievalIndex& index, const SegmentHistogram& query,
                                std::string_view exclude_id, int k, VsmMetric metric) {
  if (index.empty()) throw EmptyIndex("first-level search over an empty index");
  CandidateList scored;
  scored.reserve(index.size());
  for (const auto& rec : index.records()) {
    if (rec.segment_id == exclude_id) continue;
    scored.push_back({rec.segment_id, vsm_score(metric, query, rec.histogram), false});
  }
  if (scored.empty()) {
    throw EmptyIndex("no candidates: index holds only the query segment");
  }
  order_candidates(scored, vsm_is_similarity(metric), static_cast<std::size_t>(k));
  return scored;
}

CandidateList retrieve_impl(const RetrievalIndex& index, const SegmentHistogram& query_hist,
                            const SegmentStats& query_stats, std::string_view exclude_id,
                            const RetrieveConfig& cfg) {
  if (cfg.n < 1 || cfg.n > cfg.k1) {
    throw UsageError("n must satisfy 1 <= n <= k1 (n=" + std::to_string(cfg.n) +
                     ", k1=" + std::to_string(cfg.k1) + ")");
  }
  CandidateList pruned = level1_candidates(index, query_hist, exclude_id, cfg.k1, cfg.metric1);

  std::vector<const SegmentStats*> cands;
  cands.reserve(pruned.size());
  for (const auto& c : pruned) cands.push_back(&index.find(c.segment_id)->stats);

  CandidateList reranked = rerank(query_stats, cands, cfg.so);
  if (reranked.size() > static_cast<std::size_t>(cfg.n)) {
    reranked.resize(static_cast<std::size_t>(cfg.n));
  }
  return reranked;
}

}  // namespace

CandidateList top_k(const SegmentHistogram& query, const RetrievalIndex& index, int k,
                    VsmMetric metric) {
  if (k < 1) throw UsageError("k must be at least 1");
  return level1_candidates(index, query, query.segment_id, k, metric);
}

CandidateList retrieve(const RetrievalIndex& index, std::string_view query_id,
                       const RetrieveConfig& cfg) {
  const IndexRecord* rec = index.find(query_id);
  if (!rec) throw UnknownSegmentId("segment '" + std::string(query_id) + "' is not indexed");
  return retrieve_impl(index, rec->histogram, rec->stats, query_id, cfg);
}

CandidateList retrieve(const RetrievalIndex& index, const FrameMatrix& query,
                       const Codebook& cb, const RetrieveConfig& cfg) {
  if (cb.k() != index.num_bins() || cb.dim() != index.dim()) {
    throw DimensionMismatch("codebook (K=" + std::to_string(cb.k()) + ", D=" +
                            std::to_string(cb.dim()) + ") does not match index (K=" +
                            std::to_string(index.num_bins()) + ", D=" +
                            std::to_string(index.dim()) + ")");
  }
  const SegmentHistogram query_hist = histogram(query, cb);
  const SegmentStats query_stats = segment_stats(query);
  return retrieve_impl(index, query_hist, query_stats, query.segment_id, cfg);
}

EvalRow evaluate_pair(const RetrievalIndex& index, const EvalConfig& cfg) {
  if (index.empty()) throw EmptyIndex("evaluation over an empty index");
  if (!index.all_labeled()) {
    throw MissingLabels("evaluation requires a speaker label on every record");
  }
  EvalRow row;
  row.metric1 = cfg.metric1;
  row.metric2 = cfg.so.metric;
  row.lambda = cfg.so.lambda;
  row.ridge = cfg.so.ridge;
  row.k1 = cfg.k1;
  row.n_values = cfg.n_values;
  std::sort(row.n_values.begin(), row.n_values.end());
  const int max_n = row.n_values.empty() ? 0 : row.n_values.back();

  const auto num_queries = static_cast<std::int64_t>(index.size());
  std::vector<CandidateList> pruned(index.size());

  // Phase 1: first-level pruning for every query.
  const auto t0 = Clock::now();
  parallel_for(num_queries, cfg.threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t q = begin; q < end; ++q) {
      const auto& rec = index.record(static_cast<std::size_t>(q));
      pruned[static_cast<std::size_t>(q)] =
          level1_candidates(index, rec.histogram, rec.segment_id, cfg.k1, cfg.metric1);
    }
  });
  row.level1_seconds = seconds_since(t0);

  // Phase 2: second-order rerank of the surviving candidates.
  std::vector<CandidateList> best(index.size());
  const auto t1 = Clock::now();
  parallel_for(num_queries, cfg.threads, [&](std::int64_t begin, std::int64_t end) {
    std::vector<const SegmentStats*> cands;
    for (std::int64_t q = begin; q < end; ++q) {
      const auto& rec = index.record(static_cast<std::size_t>(q));
      const auto& level1 = pruned[static_cast<std::size_t>(q)];
      cands.clear();
      for (const auto& c : level1) cands.push_back(&index.find(c.segment_id)->stats);
      CandidateList reranked = rerank(rec.stats, cands, cfg.so);
      if (reranked.size() > static_cast<std::size_t>(max_n)) {
        reranked.resize(static_cast<std::size_t>(max_n));
      }
      best[static_cast<std::size_t>(q)] = std::move(reranked);
    }
  });
  row.level2_seconds = seconds_since(t1);
  row.total_seconds = row.level1_seconds + row.level2_seconds;

  // Hit counting is integer accumulation in query order.
  row.hits.assign(row.n_values.size(), 0);
  for (std::size_t q = 0; q < index.size(); ++q) {
    const std::string& speaker = index.record(q).speaker_label;
    const auto& ranked = best[q];

    for (std::size_t ni = 0; ni < row.n_values.size(); ++ni) {
      const auto n = static_cast<std::size_t>(row.n_values[ni]);
      const std::size_t limit = std::min(n, ranked.size());
      for (std::size_t i = 0; i < limit; ++i) {
        if (index.find(ranked[i].segment_id)->speaker_label == speaker) {
          ++row.hits[ni];
          break;
        }
      }
    }
    for (const auto& c : pruned[q]) {
      if (index.find(c.segment_id)->speaker_label == speaker) {
        ++row.recall_hits;
        break;
      }
    }
  }
  row.accuracy.resize(row.hits.size());
  for (std::size_t i = 0; i < row.hits.size(); ++i) {
    row.accuracy[i] = static_cast<double>(row.hits[i]) / static_cast<double>(num_queries);
  }
  row.recall_at_k1 = static_cast<double>(row.recall_hits) / static_cast<double>(num_queries);
  return row;
}

BaselineResult brute_force_eval(const RetrievalIndex& index, const SoConfig& so,
                                std::vector<int> n_values, int threads) {
  if (index.empty()) throw EmptyIndex("evaluation over an empty index");
  if (!index.all_labeled()) {
    throw MissingLabels("evaluation requires a speaker label on every record");
  }
  BaselineResult res;
  res.n_values = std::move(n_values);
  std::sort(res.n_values.begin(), res.n_values.end());
  const int max_n = res.n_values.empty() ? 0 : res.n_values.back();
  const auto num_queries = static_cast<std::int64_t>(index.size());

  // Per-segment terms make the quadratic BIC sweep affordable; scoring
  // through them is bit-identical to delta_bic.
  std::vector<BicTerms> terms;
  if (so.metric == SoMetric::kDeltaBic) {
    terms.reserve(index.size());
    for (const auto& rec : index.records()) terms.push_back(bic_terms(rec.stats, so.ridge));
  }

  std::vector<CandidateList> best(index.size());
  const auto t0 = Clock::now();
  parallel_for(num_queries, threads, [&](std::int64_t begin, std::int64_t end) {
    CandidateList scored;
    for (std::int64_t q = begin; q < end; ++q) {
      const auto& query = index.record(static_cast<std::size_t>(q));
      scored.clear();
      scored.reserve(index.size() - 1);
      for (std::size_t c = 0; c < index.size(); ++c) {
        if (c == static_cast<std::size_t>(q)) continue;
        const auto& cand = index.record(c);
        try {
          const double s = so.metric == SoMetric::kDeltaBic
                               ? delta_bic_from_terms(terms[static_cast<std::size_t>(q)],
                                                      terms[c], so.lambda, so.ridge)
                               : so_score(so, query.stats, cand.stats);
          scored.push_back({cand.segment_id, s, false});
        } catch (const SingularCovariance&) {
          scored.push_back({cand.segment_id, 0.0, true});
        }
      }
      order_candidates(scored, so_is_similarity(so.metric), static_cast<std::size_t>(max_n));
      best[static_cast<std::size_t>(q)] = scored;
    }
  });
  res.seconds = seconds_since(t0);

  res.hits.assign(res.n_values.size(), 0);
  for (std::size_t q = 0; q < index.size(); ++q) {
    const std::string& speaker = index.record(q).speaker_label;
    for (std::size_t ni = 0; ni < res.n_values.size(); ++ni) {
      const auto n = static_cast<std::size_t>(res.n_values[ni]);
      const std::size_t limit = std::min(n, best[q].size());
      for (std::size_t i = 0; i < limit; ++i) {
        if (index.find(best[q][i].segment_id)->speaker_label == speaker) {
          ++res.hits[ni];
          break;
        }
      }
    }
  }
  res.accuracy.resize(res.hits.size());
  for (std::size_t i = 0; i < res.hits.size(); ++i) {
    res.accuracy[i] = static_cast<double>(res.hits[i]) / static_cast<double>(num_queries);
  }
  return res;
}

double approx_audio_seconds(const RetrievalIndex& index) {
  double total = 0.0;
  for (const auto& rec : index.records()) {
    total += (static_cast<double>(rec.stats.n) - 1.0) * 0.010 + 0.025;
  }
  return total;
}

std::optional<double> speed_ratio(double audio_seconds, double retrieval_seconds) {
  if (audio_seconds <= 0.0 || retrieval_seconds <= 0.0) return std::nullopt;
  return audio_seconds / retrieval_seconds;
}

EvalReport evaluate(const RetrievalIndex& index, std::span<const VsmMetric> metrics1,
                    std::span<const SoMetric> metrics2, const EvalConfig& base,
                    bool with_baseline) {
  EvalReport report;
  report.query_count = static_cast<int>(index.size());
  report.total_audio_seconds = approx_audio_seconds(index);
  report.threads = resolve_threads(base.threads);
  for (const VsmMetric m1 : metrics1) {
    for (const SoMetric m2 : metrics2) {
      EvalConfig cfg = base;
      cfg.metric1 = m1;
      cfg.so.metric = m2;
      report.rows.push_back(evaluate_pair(index, cfg));
    }
  }
  if (with_baseline && !metrics2.empty()) {
    SoConfig so = base.so;
    so.metric = metrics2[0];
    report.baseline = brute_force_eval(index, so, base.n_values, base.threads);
  }
  return report;
}

namespace {

std::string format_pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * v << '%';
  return os.str();
}

std::string format_secs(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v << " s";
  return os.str();
}

}  // namespace

std::string EvalReport::text_table() const {
  std::ostringstream os;
  os << "queries: " << query_count << "   audio: " << std::fixed << std::setprecision(1)
     << total_audio_seconds << " s   threads: " << threads << "\n";

  const std::vector<int>& ns = rows.empty() ? std::vector<int>{} : rows.front().n_values;
  os << std::left << std::setw(10) << "metric1" << std::setw(10) << "metric2";
  for (int n : ns) os << std::setw(9) << (std::to_string(n) + "-best");
  os << std::setw(11) << "recall@k1" << std::setw(11) << "level1" << std::setw(11) << "level2"
     << std::setw(11) << "total" << std::setw(12) << "speed-ratio" << "\n";

  for (const auto& row : rows) {
    os << std::left << std::setw(10) << vsm_metric_name(row.metric1) << std::setw(10)
       << so_metric_name(row.metric2);
    for (double a : row.accuracy) os << std::setw(9) << format_pct(a);
    os << std::setw(11) << format_pct(row.recall_at_k1) << std::setw(11)
       << format_secs(row.level1_seconds) << std::setw(11) << format_secs(row.level2_seconds)
       << std::setw(11) << format_secs(row.total_seconds);
    const auto ratio = speed_ratio(total_audio_seconds, row.total_seconds);
    if (ratio) {
      std::ostringstream rs;
      rs << std::fixed << std::setprecision(1) << *ratio << "x";
      os << std::setw(12) << rs.str();
    } else {
      os << std::setw(12) << "n/a";
    }
    os << "\n";
  }
  if (baseline) {
    os << "brute-force second-order baseline: " << format_secs(baseline->seconds)
       << "  accuracies:";
    for (std::size_t i = 0; i < baseline->n_values.size(); ++i) {
      os << "  " << baseline->n_values[i] << "-best " << format_pct(baseline->accuracy[i]);
    }
    os << "\n";
  }
  return os.str();
}

std::string EvalReport::csv() const {
  std::ostringstream os;
  os << "metric1,metric2,lambda,ridge,k1";
  const std::vector<int>& ns = rows.empty() ? std::vector<int>{} : rows.front().n_values;
  for (int n : ns) os << ",acc_" << n << "_best";
  os << ",recall_at_k1,level1_seconds,level2_seconds,total_seconds,speed_ratio,queries\n";
  for (const auto& row : rows) {
    os << vsm_metric_name(row.metric1) << ',' << so_metric_name(row.metric2) << ','
       << row.lambda << ',' << row.ridge << ',' << row.k1;
    for (double a : row.accuracy) os << ',' << std::setprecision(10) << a;
    os << ',' << std::setprecision(10) << row.recall_at_k1 << ',' << row.level1_seconds << ','
       << row.level2_seconds << ',' << row.total_seconds;
    const auto ratio = speed_ratio(total_audio_seconds, row.total_seconds);
    os << ',';
    if (ratio) os << *ratio;
    os << ',' << query_count << "\n";
  }
  return os.str();
}

}  // namespace spkret
