#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "spkret/features.hpp"
#include "spkret/vsm.hpp"

namespace spkret {

inline constexpr double kDefaultRidge = 1e-6;
inline constexpr double kDefaultLambda = 1.0;

/// Gaussian sufficient statistics of one segment. The raw sum and sum of
/// outer products are retained so pooled statistics over two segments are
/// exact, not a weighted average of the two covariances.
struct SegmentStats {
  std::string segment_id;
  std::int64_t n = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;        // unbiased, 1/(n-1), symmetrized
  Eigen::VectorXd sum;        // sum of frames
  Eigen::MatrixXd sum_outer;  // sum of x * x^T

  int dim() const { return static_cast<int>(mean.size()); }
  /// True when n < dim + 1, i.e. the covariance is rank deficient and the
  /// measures lean on regularization.
  bool low_rank() const { return n < dim() + 1; }
};

/// Mean and unbiased covariance of a segment; throws TooFewFrames if n < 2.
SegmentStats segment_stats(const FrameMatrix& seg);

/// Rebuilds stats whose sums were lost (e.g. after deserialization):
/// sum = n * mean, sum_outer = (n-1) * cov + n * mean * mean^T.
SegmentStats stats_from_moments(std::string segment_id, std::int64_t n, Eigen::VectorXd mean,
                                Eigen::MatrixXd cov);

struct PooledCov {
  std::int64_t n = 0;
  Eigen::MatrixXd cov;  // unbiased covariance of the union of both frame sets
};

/// Exact covariance of the two segments' frames pooled together, computed
/// from the retained sums with 1/(n_union - 1) scaling.
PooledCov pooled_cov(const SegmentStats& a, const SegmentStats& b);

/// Adds ridge * (trace/d) to the diagonal (ridge * I when the trace is not
/// positive). ridge <= 0 returns the input unchanged.
Eigen::MatrixXd regularize_covariance(const Eigen::MatrixXd& cov, double ridge);

/// log|C| via Cholesky of the regularized matrix. Throws SingularCovariance
/// when the factorization fails (possible only with ridge disabled on valid
/// input).
double log_det_spd(const Eigen::MatrixXd& cov, double ridge);

/// Bayesian information criterion difference between modeling the two
/// segments with one Gaussian versus two:
///   0.5*n_a*log|S_a| + 0.5*n_b*log|S_b| - 0.5*n_ab*log|S_ab| + lambda*P,
///   P = 0.5*(d + 0.5*d*(d+1)) * log(n_a + n_b).
/// The determinant terms use maximum-likelihood (1/n) covariance scaling so
/// that a segment paired with itself scores exactly lambda*P. Positive
/// values indicate similarity, so the metric ranks descending.
double delta_bic(const SegmentStats& a, const SegmentStats& b, double lambda = kDefaultLambda,
                 double ridge = kDefaultRidge);

/// Per-segment quantities reused across many delta_bic evaluations of the
/// same segment; scoring through terms is bit-identical to delta_bic.
struct BicTerms {
  double n = 0.0;
  Eigen::VectorXd sum;
  Eigen::MatrixXd sum_outer;
  double log_det = 0.0;  // of the regularized ML covariance
};
BicTerms bic_terms(const SegmentStats& s, double ridge = kDefaultRidge);
double delta_bic_from_terms(const BicTerms& a, const BicTerms& b,
                            double lambda = kDefaultLambda, double ridge = kDefaultRidge);

/// 0.5 * tr[(C1 - C2)(C2^-1 - C1^-1)]; symmetric, >= 0, 0 iff C1 == C2.
double divergence_shape(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2,
                        double ridge = kDefaultRidge);

/// Arithmetic-harmonic sphericity, log(tr(C1*C2^-1) * tr(C2*C1^-1) / d^2);
/// symmetric, >= 0, 0 iff C1 is a positive multiple of C2.
double ahs(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double ridge = kDefaultRidge);

/// The sphericity expression with the inverses composed in sequence,
/// 0.5 * tr[(C1*C2^-1)(C2*C1^-1)], collapses algebraically to tr(I)/2 = d/2
/// for every invertible pair; kept selectable to make that degeneracy
/// observable. Validates invertibility, then returns d/2.
double ahs_literal(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2,
                   double ridge = kDefaultRidge);

/// Two-sample Hotelling statistic with the pooled covariance
/// C = ((N-1)C1 + (M-1)C2)/(N+M-2):
///   T^2 = N*M/(N+M) * (mu1 - mu2)^T C^-1 (mu1 - mu2).
double hotelling_t2(const SegmentStats& a, const SegmentStats& b, double ridge = kDefaultRidge);

/// Second-level measures. DeltaBic is a similarity (higher = closer); the
/// other three are dissimilarities.
enum class SoMetric { kDeltaBic, kDivergenceShape, kAhs, kHotellingT2 };

bool so_is_similarity(SoMetric m);
std::string so_metric_name(SoMetric m);
SoMetric parse_so_metric(std::string_view name);  // bic|ds|ahs|t2

struct SoConfig {
  SoMetric metric = SoMetric::kDeltaBic;
  double lambda = kDefaultLambda;
  double ridge = kDefaultRidge;
  bool literal_ahs = false;
};

double so_score(const SoConfig& cfg, const SegmentStats& a, const SegmentStats& b);

/// Scores every candidate against the query and orders per the metric
/// orientation, ties broken by ascending segment id. A candidate whose
/// score raises SingularCovariance is flagged and ranked after all scored
/// candidates.
CandidateList rerank(const SegmentStats& query, std::span<const SegmentStats* const> candidates,
                     const SoConfig& cfg);

}  // namespace spkret
