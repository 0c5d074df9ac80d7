#include "spkret/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spkret/errors.hpp"
#include "spkret/rng.hpp"

namespace spkret {
namespace {

std::string zero_padded(const char* prefix, int value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, value);
  return buf;
}

void validate(const SynthSpec& spec) {
  if (spec.num_speakers < 1 || spec.segments_per_speaker < 1 || spec.frames_min < 1 ||
      spec.frames_max < spec.frames_min || spec.dim < 1) {
    throw InvalidSpec("synthetic corpus counts must be >= 1 and frames_min <= frames_max");
  }
  if (!(spec.mean_spread > 0.0) || !(spec.cov_scale > 0.0)) {
    throw InvalidSpec("mean_spread and cov_scale must be positive");
  }
}

/// Random rotation: QR of a Gaussian matrix with column signs fixed so the
/// factorization is unique.
Eigen::MatrixXd random_rotation(int dim, Rng& rng) {
  Eigen::MatrixXd gauss(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) gauss(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gauss);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  SynthCorpus corpus;
  corpus.segments.reserve(static_cast<std::size_t>(spec.num_speakers) *
                          spec.segments_per_speaker);

  for (int s = 0; s < spec.num_speakers; ++s) {
    SpeakerModel model;
    model.speaker_id = zero_padded("spk", s);

    model.mean.resize(spec.dim);
    for (int i = 0; i < spec.dim; ++i) model.mean[i] = spec.mean_spread * rng.normal();

    // Eigenvalues log-uniform over [0.1, 10] * cov_scale^2: condition <= 100.
    Eigen::VectorXd eigenvalues(spec.dim);
    for (int i = 0; i < spec.dim; ++i) {
      eigenvalues[i] =
          spec.cov_scale * spec.cov_scale * std::pow(10.0, 2.0 * rng.uniform01() - 1.0);
    }
    const Eigen::MatrixXd rotation = random_rotation(spec.dim, rng);
    const Eigen::MatrixXd transform =
        rotation * eigenvalues.cwiseSqrt().asDiagonal();  // cov = T * T^t
    model.cov = transform * transform.transpose();
    model.cov = ((model.cov + model.cov.transpose()) * 0.5).eval();
    model.min_eigenvalue = eigenvalues.minCoeff();
    if (!(model.min_eigenvalue > 0.0)) {
      throw InvalidSpec("generated covariance for " + model.speaker_id +
                        " is not positive definite");
    }

    for (int g = 0; g < spec.segments_per_speaker; ++g) {
      const int frames =
          spec.frames_min +
          static_cast<int>(rng.uniform_below(
              static_cast<std::uint64_t>(spec.frames_max - spec.frames_min + 1)));
      FrameMatrix fm;
      fm.segment_id = model.speaker_id + "_" + zero_padded("seg", g);
      fm.features.resize(frames, spec.dim);
      Eigen::VectorXd z(spec.dim);
      for (int f = 0; f < frames; ++f) {
        for (int i = 0; i < spec.dim; ++i) z[i] = rng.normal();
        fm.features.row(f) = (model.mean + transform * z).transpose();
      }
      fm.frame_times.resize(static_cast<std::size_t>(frames));
      for (int f = 0; f < frames; ++f) fm.frame_times[static_cast<std::size_t>(f)] = 0.010 * f;
      corpus.labels[fm.segment_id] = model.speaker_id;
      corpus.segments.push_back(std::move(fm));
    }
    corpus.speakers.push_back(std::move(model));
  }
  return corpus;
}

CandidateList brute_force_retrieve(const SegmentStats& query,
                                   std::span<const SegmentStats> corpus, const SoConfig& so,
                                   int n) {
  if (corpus.size() < 2) throw EmptyCorpus("brute-force retrieval needs at least 2 segments");
  if (n < 1) throw UsageError("n must be at least 1");

  CandidateList scored;
  scored.reserve(corpus.size());
  for (const auto& cand : corpus) {
    if (cand.segment_id == query.segment_id) continue;
    try {
      scored.push_back({cand.segment_id, so_score(so, query, cand), false});
    } catch (const SingularCovariance&) {
      scored.push_back({cand.segment_id, 0.0, true});
    }
  }

  const bool sim = so_is_similarity(so.metric);
  std::sort(scored.begin(), scored.end(), [sim](const ScoredSegment& a, const ScoredSegment& b) {
    if (a.flagged != b.flagged) return !a.flagged;
    if (!a.flagged && a.score != b.score) return sim ? a.score > b.score : a.score < b.score;
    return a.segment_id < b.segment_id;
  });
  if (scored.size() > static_cast<std::size_t>(n)) scored.resize(static_cast<std::size_t>(n));
  return scored;
}

CandidateList brute_force_retrieve(const FrameMatrix& query,
                                   std::span<const FrameMatrix> corpus, const SoConfig& so,
                                   int n) {
  const SegmentStats query_stats = segment_stats(query);
  std::vector<SegmentStats> stats;
  stats.reserve(corpus.size());
  for (const auto& seg : corpus) stats.push_back(segment_stats(seg));
  return brute_force_retrieve(query_stats, stats, so, n);
}

}  // namespace spkret
