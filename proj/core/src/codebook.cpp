#include "spkret/codebook.hpp"

#include <cmath>
#include <limits>

#include "binio.hpp"
#include "kahan.hpp"
#include "parallel.hpp"
#include "spkret/errors.hpp"
#include "spkret/rng.hpp"

namespace spkret {

static constexpr char kCodebookMagic[9] = "SPKCBK1\0";

Eigen::MatrixXd sample_frames(std::span<const FrameMatrix> segments, int per_segment,
                              std::uint64_t seed) {
  if (segments.empty()) throw EmptyCorpus("no segments to sample frames from");

  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::vector<std::uint32_t>>> picks;
  picks.reserve(segments.size());
  std::int64_t total = 0;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto n = static_cast<std::uint32_t>(segments[s].num_frames());
    auto idx = rng.sample_without_replacement(n, static_cast<std::uint32_t>(per_segment));
    total += static_cast<std::int64_t>(idx.size());
    picks.emplace_back(s, std::move(idx));
  }

  const Eigen::Index dim = segments[0].dim();
  Eigen::MatrixXd out(total, dim);
  Eigen::Index row = 0;
  for (const auto& [s, idx] : picks) {
    if (segments[s].dim() != dim) {
      throw DimensionMismatch("segment '" + segments[s].segment_id + "' has dimension " +
                              std::to_string(segments[s].dim()) + ", expected " +
                              std::to_string(dim));
    }
    for (const auto i : idx) out.row(row++) = segments[s].features.row(i);
  }
  return out;
}

namespace {

double squared_distance(const Eigen::MatrixXd& frames, Eigen::Index row,
                        const Eigen::MatrixXd& centroids, Eigen::Index c) {
  return (frames.row(row) - centroids.row(c)).squaredNorm();
}

/// k-means++ seeding: first centroid uniform, then D^2 sampling.
Eigen::MatrixXd init_plus_plus(const Eigen::MatrixXd& frames, int k, Rng& rng) {
  const Eigen::Index n = frames.rows();
  Eigen::MatrixXd centroids(k, frames.cols());
  centroids.row(0) = frames.row(static_cast<Eigen::Index>(rng.uniform_below(n)));

  Eigen::VectorXd min_d2 =
      (frames.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    KahanSum total;
    for (Eigen::Index i = 0; i < n; ++i) total.add(min_d2[i]);
    Eigen::Index chosen;
    if (total.value() <= 0.0) {
      chosen = static_cast<Eigen::Index>(rng.uniform_below(n));
    } else {
      const double target = rng.uniform01() * total.value();
      double cum = 0.0;
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        cum += min_d2[i];
        if (cum > target) {
          chosen = i;
          break;
        }
      }
    }
    centroids.row(c) = frames.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      min_d2[i] = std::min(min_d2[i], (frames.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

}  // namespace

Codebook train_kmeans(const Eigen::MatrixXd& frames, int k, int max_iters, double tol,
                      std::uint64_t seed, int threads) {
  const Eigen::Index n = frames.rows();
  const Eigen::Index dim = frames.cols();
  if (k < 2) throw InvalidSpec("codebook size must be at least 2, got " + std::to_string(k));
  if (n < k) {
    throw TooFewFrames("k-means needs at least " + std::to_string(k) + " frames, got " +
                       std::to_string(n));
  }

  Rng rng(seed);
  Eigen::MatrixXd centroids = init_plus_plus(frames, k, rng);

  std::vector<int> assignment(static_cast<std::size_t>(n), 0);
  std::vector<double> dist2(static_cast<std::size_t>(n), 0.0);
  KmeansMeta meta;
  double prev_inertia = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < max_iters; ++iter) {
    // Assignment: pure per-frame, safe to chunk across threads.
    parallel_for(n, threads, [&](std::int64_t begin, std::int64_t end) {
      for (std::int64_t i = begin; i < end; ++i) {
        double best = squared_distance(frames, i, centroids, 0);
        int best_c = 0;
        for (int c = 1; c < k; ++c) {
          const double d = squared_distance(frames, i, centroids, c);
          if (d < best) {
            best = d;
            best_c = c;
          }
        }
        assignment[static_cast<std::size_t>(i)] = best_c;
        dist2[static_cast<std::size_t>(i)] = best;
      }
    });

    KahanSum inertia;
    for (Eigen::Index i = 0; i < n; ++i) inertia.add(dist2[static_cast<std::size_t>(i)]);
    meta.inertia = inertia.value();
    meta.inertia_trace.push_back(meta.inertia);
    meta.iterations = iter + 1;
    // Lloyd iterations never increase inertia; tolerate fp noise.
    if (meta.inertia > prev_inertia * (1.0 + 1e-9) + 1e-12) {
      throw Error("k-means inertia increased: " + std::to_string(prev_inertia) + " -> " +
                  std::to_string(meta.inertia));
    }
    prev_inertia = meta.inertia;

    // Update: accumulate in frame order so results are thread-count invariant.
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, dim);
    std::vector<std::int64_t> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = assignment[static_cast<std::size_t>(i)];
      sums.row(c) += frames.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }

    Eigen::MatrixXd next(k, dim);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        next.row(c) = centroids.row(c);  // re-seeded below
      }
    }

    // Re-seed empty clusters with the frame farthest from its centroid,
    // each frame used at most once, clusters handled in ascending order.
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far_i = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        if (dist2[static_cast<std::size_t>(i)] > far_d) {
          far_d = dist2[static_cast<std::size_t>(i)];
          far_i = i;
        }
      }
      if (far_i >= 0) {
        next.row(c) = frames.row(far_i);
        used[static_cast<std::size_t>(far_i)] = 1;
      }
    }

    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      max_shift = std::max(max_shift, (next.row(c) - centroids.row(c)).norm());
    }
    centroids = std::move(next);
    if (max_shift < tol) break;
  }

  // Final inertia under the final centroids.
  parallel_for(n, threads, [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      double best = squared_distance(frames, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        best = std::min(best, squared_distance(frames, i, centroids, c));
      }
      dist2[static_cast<std::size_t>(i)] = best;
    }
  });
  KahanSum final_inertia;
  for (Eigen::Index i = 0; i < n; ++i) final_inertia.add(dist2[static_cast<std::size_t>(i)]);
  meta.inertia = final_inertia.value();

  Codebook cb;
  cb.centroids = std::move(centroids);
  cb.train_seed = seed;
  cb.meta = std::move(meta);
  return cb;
}

int quantize(const Eigen::Ref<const Eigen::VectorXd>& frame, const Codebook& cb) {
  if (frame.size() != cb.dim()) {
    throw DimensionMismatch("frame dimension " + std::to_string(frame.size()) +
                            " does not match codebook dimension " + std::to_string(cb.dim()));
  }
  double best = (cb.centroids.row(0).transpose() - frame).squaredNorm();
  int best_c = 0;
  for (int c = 1; c < cb.k(); ++c) {
    const double d = (cb.centroids.row(c).transpose() - frame).squaredNorm();
    if (d < best) {  // strict: ties keep the lowest index
      best = d;
      best_c = c;
    }
  }
  return best_c;
}

SegmentHistogram histogram(const FrameMatrix& seg, const Codebook& cb) {
  if (seg.num_frames() < 1) throw EmptySegment("segment '" + seg.segment_id + "' has no frames");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(cb.k()), 0);
  for (Eigen::Index i = 0; i < seg.num_frames(); ++i) {
    ++counts[static_cast<std::size_t>(quantize(seg.features.row(i).transpose(), cb))];
  }
  SegmentHistogram h;
  h.segment_id = seg.segment_id;
  h.num_bins = cb.k();
  const double n = static_cast<double>(seg.num_frames());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    if (counts[b] > 0) {
      h.entries.push_back({static_cast<std::uint32_t>(b), static_cast<double>(counts[b]) / n});
    }
  }
  return h;
}

void save_codebook(const std::string& path, const Codebook& cb) {
  binio::Writer w(path);
  w.magic(kCodebookMagic);
  w.u32(static_cast<std::uint32_t>(cb.k()));
  w.u32(static_cast<std::uint32_t>(cb.dim()));
  w.u64(cb.train_seed);
  for (int r = 0; r < cb.k(); ++r) {
    for (int c = 0; c < cb.dim(); ++c) {
      w.f32(static_cast<float>(cb.centroids(r, c)));
    }
  }
  w.close();
}

Codebook load_codebook(const std::string& path) {
  binio::Reader r(path);
  r.magic(kCodebookMagic);
  const std::uint32_t k = r.u32();
  const std::uint32_t d = r.u32();
  if (k < 2 || d == 0) throw CorruptFile(path + ": invalid codebook shape");
  Codebook cb;
  cb.train_seed = r.u64();
  cb.centroids.resize(k, d);
  for (std::uint32_t row = 0; row < k; ++row) {
    for (std::uint32_t col = 0; col < d; ++col) {
      const double v = static_cast<double>(r.f32());
      if (!std::isfinite(v)) throw CorruptFile(path + ": non-finite centroid value");
      cb.centroids(row, col) = v;
    }
  }
  return cb;
}

}  // namespace spkret
