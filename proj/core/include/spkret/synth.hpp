#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spkret/features.hpp"
#include "spkret/stats.hpp"

namespace spkret {

/// Parameters of a generated labeled corpus: Gaussian speakers with random
/// means (scale mean_spread) and random positive-definite covariances
/// (scale cov_scale, condition number bounded by 100).
struct SynthSpec {
  int num_speakers = 20;
  int segments_per_speaker = 10;
  int frames_min = 150;
  int frames_max = 400;
  int dim = 26;
  double mean_spread = 10.0;
  double cov_scale = 1.0;
  std::uint64_t seed = 1;
};

struct SpeakerModel {
  std::string speaker_id;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double min_eigenvalue = 0.0;  // checked > 0 at generation
};

struct SynthCorpus {
  std::vector<FrameMatrix> segments;
  std::map<std::string, std::string> labels;  // segment_id -> speaker_id
  std::vector<SpeakerModel> speakers;
};

/// Deterministic generation under one sequential random stream: for each
/// speaker in order, the mean (dim normals), covariance eigenvalues (dim
/// uniforms, log-uniform over two decades), a random rotation (dim*dim
/// normals through a sign-fixed QR), then per segment the frame count and
/// the frames themselves (frame-major normal draws). Throws InvalidSpec on
/// out-of-range parameters.
SynthCorpus generate(const SynthSpec& spec);

/// Second-order retrieval with no pruning: scores the query against every
/// other segment directly, full sort, first n. Kept as a standalone scan,
/// independent of the two-level pipeline, so equivalence tests against it
/// are meaningful.
CandidateList brute_force_retrieve(const SegmentStats& query,
                                   std::span<const SegmentStats> corpus, const SoConfig& so,
                                   int n);

/// Convenience overload computing the statistics from raw frames.
CandidateList brute_force_retrieve(const FrameMatrix& query,
                                   std::span<const FrameMatrix> corpus, const SoConfig& so,
                                   int n);

}  // namespace spkret
