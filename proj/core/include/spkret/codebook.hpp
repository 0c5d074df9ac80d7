#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spkret/features.hpp"
#include "spkret/histogram.hpp"

namespace spkret {

struct KmeansMeta {
  int iterations = 0;
  double inertia = 0.0;
  std::vector<double> inertia_trace;  // assignment-step inertia per iteration
};

/// Universal codebook shared by every segment: K centroids of dimension D.
struct Codebook {
  Eigen::MatrixXd centroids;  // K x D
  std::uint64_t train_seed = 0;
  KmeansMeta meta;

  int k() const { return static_cast<int>(centroids.rows()); }
  int dim() const { return static_cast<int>(centroids.cols()); }
};

/// Uniformly samples up to per_segment frames from each segment without
/// replacement (all frames when a segment has fewer). Output rows follow
/// segment order, then ascending frame index within a segment.
/// Deterministic for a given seed. Throws EmptyCorpus on empty input.
Eigen::MatrixXd sample_frames(std::span<const FrameMatrix> segments, int per_segment,
                              std::uint64_t seed);

/// Lloyd k-means with k-means++ initialization.
///   - Euclidean distance, assignment ties broken by lowest centroid index.
///   - Centroid accumulation runs in fixed frame order, so the result does
///     not depend on the thread count.
///   - Empty clusters are re-seeded with the frame farthest from its
///     assigned centroid.
///   - Stops when the largest centroid displacement drops below tol, or
///     after max_iters iterations.
/// Throws TooFewFrames when frames.rows() < k.
Codebook train_kmeans(const Eigen::MatrixXd& frames, int k, int max_iters = 50,
                      double tol = 1e-4, std::uint64_t seed = 0, int threads = 0);

/// Index of the nearest centroid; ties go to the lowest index.
int quantize(const Eigen::Ref<const Eigen::VectorXd>& frame, const Codebook& cb);

/// Normalized bin-occupancy histogram of a segment under the codebook.
SegmentHistogram histogram(const FrameMatrix& seg, const Codebook& cb);

/// SPKCBK1 codebook file: 8-byte magic "SPKCBK1\0", little-endian
/// u32 K, u32 D, u64 seed, K*D IEEE-754 32-bit floats row-major.
void save_codebook(const std::string& path, const Codebook& cb);
Codebook load_codebook(const std::string& path);

}  // namespace spkret
