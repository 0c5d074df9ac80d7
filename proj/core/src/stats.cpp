#include "spkret/stats.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kahan.hpp"
#include "spkret/errors.hpp"

namespace spkret {
namespace {

void check_dims(const SegmentStats& a, const SegmentStats& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("segment '" + a.segment_id + "' has dimension " +
                            std::to_string(a.dim()) + ", segment '" + b.segment_id + "' has " +
                            std::to_string(b.dim()));
  }
}

Eigen::LLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& cov, double ridge,
                                      const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(regularize_covariance(cov, ridge));
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance(std::string(what) + ": covariance not positive definite (ridge=" +
                             std::to_string(ridge) + ")");
  }
  return llt;
}

double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::MatrixXd& l = llt.matrixLLT();
  KahanSum s;
  for (Eigen::Index i = 0; i < l.rows(); ++i) s.add(std::log(l(i, i)));
  return 2.0 * s.value();
}

/// Maximum-likelihood (1/n) covariance from retained sums.
Eigen::MatrixXd ml_cov(const Eigen::VectorXd& sum, const Eigen::MatrixXd& sum_outer,
                       double n) {
  return (sum_outer - (sum / n) * sum.transpose()) / n;
}

}  // namespace

SegmentStats segment_stats(const FrameMatrix& seg) {
  const Eigen::Index n = seg.num_frames();
  if (n < 2) {
    throw TooFewFrames("segment '" + seg.segment_id + "' has " + std::to_string(n) +
                       " frames; covariance needs at least 2");
  }
  const Eigen::Index d = seg.dim();

  SegmentStats st;
  st.segment_id = seg.segment_id;
  st.n = n;
  st.sum = seg.features.colwise().sum().transpose();
  st.mean = st.sum / static_cast<double>(n);

  st.sum_outer = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = seg.features.row(i).transpose();
    st.sum_outer.noalias() += row * row.transpose();
    const Eigen::VectorXd centered = row - st.mean;
    scatter.noalias() += centered * centered.transpose();
  }
  st.cov = scatter / static_cast<double>(n - 1);
  st.cov = ((st.cov + st.cov.transpose()) * 0.5).eval();
  return st;
}

SegmentStats stats_from_moments(std::string segment_id, std::int64_t n, Eigen::VectorXd mean,
                                Eigen::MatrixXd cov) {
  if (n < 2) {
    throw TooFewFrames("segment '" + segment_id + "' has " + std::to_string(n) +
                       " frames; covariance needs at least 2");
  }
  SegmentStats st;
  st.segment_id = std::move(segment_id);
  st.n = n;
  st.sum = static_cast<double>(n) * mean;
  st.sum_outer = static_cast<double>(n - 1) * cov +
                 static_cast<double>(n) * mean * mean.transpose();
  st.mean = std::move(mean);
  st.cov = std::move(cov);
  return st;
}

PooledCov pooled_cov(const SegmentStats& a, const SegmentStats& b) {
  check_dims(a, b);
  const double n = static_cast<double>(a.n + b.n);
  const Eigen::VectorXd sum = a.sum + b.sum;
  const Eigen::MatrixXd sum_outer = a.sum_outer + b.sum_outer;
  const Eigen::VectorXd mean = sum / n;
  Eigen::MatrixXd cov = (sum_outer - n * mean * mean.transpose()) / (n - 1.0);
  cov = ((cov + cov.transpose()) * 0.5).eval();
  return {a.n + b.n, std::move(cov)};
}

Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& cov, double ridge) {
  if (ridge <= 0.0) return cov;
  const double d = static_cast<double>(cov.rows());
  const double trace = cov.trace();
  const double scale = trace > 0.0 ? trace / d : 1.0;
  return cov + ridge * scale * Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
}

double log_det_spd(const Eigen::MatrixXd& cov, double ridge) {
  return log_det_from_llt(factorize(cov, ridge, "log-determinant"));
}

BicTerms bic_terms(const SegmentStats& s, double ridge) {
  BicTerms t;
  t.n = static_cast<double>(s.n);
  t.sum = s.sum;
  t.sum_outer = s.sum_outer;
  t.log_det = log_det_spd(ml_cov(s.sum, s.sum_outer, t.n), ridge);
  return t;
}

double delta_bic_from_terms(const BicTerms& a, const BicTerms& b, double lambda, double ridge) {
  const double nab = a.n + b.n;
  const double d = static_cast<double>(a.sum.size());
  const Eigen::MatrixXd cov_ab = ml_cov(a.sum + b.sum, a.sum_outer + b.sum_outer, nab);
  const double ld_ab = log_det_spd(cov_ab, ridge);

  const double data_term = 0.5 * (a.n * a.log_det + b.n * b.log_det) - 0.5 * nab * ld_ab;
  const double penalty = 0.5 * (d + 0.5 * d * (d + 1.0)) * std::log(nab);
  return data_term + lambda * penalty;
}

double delta_bic(const SegmentStats& a, const SegmentStats& b, double lambda, double ridge) {
  check_dims(a, b);
  // ML-scaled (1/n) covariances, all derived from the retained sums, so the
  // determinant terms of a self-pair cancel exactly.
  return delta_bic_from_terms(bic_terms(a, ridge), bic_terms(b, ridge), lambda, ridge);
}

double divergence_shape(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double ridge) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols()) {
    throw DimensionMismatch("covariance shapes differ");
  }
  const Eigen::Index d = c1.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd inv1 = factorize(c1, ridge, "divergence shape").solve(identity);
  const Eigen::MatrixXd inv2 = factorize(c2, ridge, "divergence shape").solve(identity);
  const Eigen::MatrixXd diff = c1 - c2;
  const Eigen::MatrixXd inv_diff = inv2 - inv1;
  // trace of the product without forming it
  KahanSum tr;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      tr.add(diff(i, j) * inv_diff(j, i));
    }
  }
  return 0.5 * tr.value();
}

double ahs(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double ridge) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols()) {
    throw DimensionMismatch("covariance shapes differ");
  }
  const Eigen::Index d = c1.rows();
  const Eigen::MatrixXd r1 = regularize_covariance(c1, ridge);
  const Eigen::MatrixXd r2 = regularize_covariance(c2, ridge);
  const auto llt1 = factorize(c1, ridge, "sphericity");
  const auto llt2 = factorize(c2, ridge, "sphericity");
  // tr(A * B^-1) = sum of the diagonal of B^-1 * A (solve, no explicit inverse)
  const double tr12 = llt2.solve(r1).trace();
  const double tr21 = llt1.solve(r2).trace();
  return std::log(tr12 * tr21 / (static_cast<double>(d) * static_cast<double>(d)));
}

double ahs_literal(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double ridge) {
  if (c1.rows() != c2.rows() || c1.cols() != c2.cols()) {
    throw DimensionMismatch("covariance shapes differ");
  }
  factorize(c1, ridge, "literal sphericity");
  factorize(c2, ridge, "literal sphericity");
  // (C1*C2^-1)*(C2*C1^-1) is the identity for any invertible pair.
  return 0.5 * static_cast<double>(c1.rows());
}

double hotelling_t2(const SegmentStats& a, const SegmentStats& b, double ridge) {
  check_dims(a, b);
  const double n = static_cast<double>(a.n);
  const double m = static_cast<double>(b.n);
  const Eigen::MatrixXd pooled =
      ((n - 1.0) * a.cov + (m - 1.0) * b.cov) / (n + m - 2.0);
  const Eigen::VectorXd delta = a.mean - b.mean;
  // Quadratic form through the triangular factor: ||L^-1 d||^2 >= 0 in
  // floating point, unlike d . C^-1 d.
  const auto llt = factorize(pooled, ridge, "Hotelling T^2");
  const Eigen::VectorXd half = llt.matrixL().solve(delta);
  return (n * m / (n + m)) * half.squaredNorm();
}

bool so_is_similarity(SoMetric m) { return m == SoMetric::kDeltaBic; }

std::string so_metric_name(SoMetric m) {
  switch (m) {
    case SoMetric::kDeltaBic:
      return "bic";
    case SoMetric::kDivergenceShape:
      return "ds";
    case SoMetric::kAhs:
      return "ahs";
    case SoMetric::kHotellingT2:
      return "t2";
  }
  return "?";
}

SoMetric parse_so_metric(std::string_view name) {
  if (name == "bic") return SoMetric::kDeltaBic;
  if (name == "ds") return SoMetric::kDivergenceShape;
  if (name == "ahs") return SoMetric::kAhs;
  if (name == "t2") return SoMetric::kHotellingT2;
  throw UsageError("unknown second-level metric '" + std::string(name) +
                   "' (expected bic|ds|ahs|t2)");
}

double so_score(const SoConfig& cfg, const SegmentStats& a, const SegmentStats& b) {
  switch (cfg.metric) {
    case SoMetric::kDeltaBic:
      return delta_bic(a, b, cfg.lambda, cfg.ridge);
    case SoMetric::kDivergenceShape:
      return divergence_shape(a.cov, b.cov, cfg.ridge);
    case SoMetric::kAhs:
      return cfg.literal_ahs ? ahs_literal(a.cov, b.cov, cfg.ridge)
                             : ahs(a.cov, b.cov, cfg.ridge);
    case SoMetric::kHotellingT2:
      return hotelling_t2(a, b, cfg.ridge);
  }
  throw UsageError("unhandled second-level metric");
}

CandidateList rerank(const SegmentStats& query, std::span<const SegmentStats* const> candidates,
                     const SoConfig& cfg) {
  if (candidates.empty()) throw EmptyIndex("second-level rerank of an empty candidate set");

  CandidateList scored;
  scored.reserve(candidates.size());
  for (const SegmentStats* cand : candidates) {
    try {
      scored.push_back({cand->segment_id, so_score(cfg, query, *cand), false});
    } catch (const SingularCovariance&) {
      scored.push_back({cand->segment_id, 0.0, true});
    }
  }

  const bool sim = so_is_similarity(cfg.metric);
  std::sort(scored.begin(), scored.end(), [sim](const ScoredSegment& a, const ScoredSegment& b) {
    if (a.flagged != b.flagged) return !a.flagged;  // flagged candidates last
    if (!a.flagged && a.score != b.score) return sim ? a.score > b.score : a.score < b.score;
    return a.segment_id < b.segment_id;
  });
  return scored;
}

}  // namespace spkret
