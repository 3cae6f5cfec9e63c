#pragma once

#include "ilpcm/sampler.hpp"

#include <armadillo>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace ilpcm {

// Cluster labels per node; any non-negative integers, only blocks matter.
using Partition = std::vector<std::size_t>;

struct PosteriorSimilarity {
  arma::mat matrix;  // symmetric, unit diagonal
  std::size_t draws_used = 0;
};

PosteriorSimilarity posterior_similarity(const std::vector<Partition>& labels);
PosteriorSimilarity posterior_similarity(const std::vector<Draw>& draws);

// Lower bound of the posterior expected Variation of Information of c
// (base-2 logs), from the similarity matrix alone.
double vi_lower_bound(const Partition& c, const arma::mat& psm);

// Average-linkage clustering of 1 - psm, cut at every merge height:
// partitions with n, n-1, ..., 1 blocks.
std::vector<Partition> average_linkage_cuts(const arma::mat& psm);

struct PartitionEstimate {
  Partition partition;  // relabeled 0..G_hat-1 in first-appearance order
  std::size_t G_hat = 0;
  double loss = 0.0;
  std::size_t index = 0;  // position of the winner in the candidate list
  bool refined = false;   // improved by local moves after the candidate search
};

// Minimizer of vi_lower_bound over the candidates; ties go to fewer blocks,
// then to the earlier candidate.
PartitionEstimate estimate_partition_vi(const PosteriorSimilarity& psm,
                                        const std::vector<Partition>& candidates);
// Sampled partitions followed by every average-linkage cut, then local
// refinement of the winner.
PartitionEstimate estimate_partition_vi(const PosteriorSimilarity& psm,
                                        const std::vector<Draw>& draws);

// Greedy descent on the VI bound by single-node moves and block merges until
// no move lowers the loss.
Partition refine_partition_vi(Partition c, const arma::mat& psm);

std::size_t block_count(const Partition& c);
Partition canonical_labels(const Partition& c);

struct ClusterSummary {
  Partition partition;
  std::size_t G_hat = 0;
  std::vector<arma::vec> mu_hat;
  std::vector<arma::vec> sigma2_hat;
  std::vector<double> pi_hat;
  std::size_t retained_draws = 0;
  std::size_t total_draws = 0;
};

// Pools every component-mean draw, clusters them with k-means (Ĝ centers,
// k-means++ starts, fixed seed), keeps the draws whose means land in a full
// permutation of the cells and averages their reordered parameters.
// Throws DataError("no identifiable draws") when nothing survives.
ClusterSummary relabel_and_estimate(const std::vector<Draw>& draws, std::size_t G_hat,
                                    std::uint64_t seed = 20240607, std::size_t restarts = 50);

struct KMeansResult {
  arma::mat centers;  // p x k
  std::vector<std::size_t> assignment;
  double within_ss = 0.0;
};
// Rows of X are points.
KMeansResult kmeans(const arma::mat& X, std::size_t k, Rng& rng, std::size_t restarts);

struct AlignedCoordinates {
  arma::mat mean;                   // n x p
  std::vector<double> correlations;  // per draw, against the reference
};
AlignedCoordinates procrustes_align_trace(const std::vector<arma::mat>& coords,
                                          const arma::mat& reference);
AlignedCoordinates procrustes_align_trace(const std::vector<Draw>& draws,
                                          const arma::mat& reference);
// Index of the draw with the largest log-likelihood (first on ties).
std::size_t max_loglik_draw(const std::vector<Draw>& draws);

// Draw expressed in the frame of the reference: coordinates and component
// means mapped by the fitted similarity transform, variances by the diagonal
// of the transformed covariance.
Draw align_draw(const Draw& d, const arma::mat& reference);

struct PosteriorSummary {
  PosteriorSimilarity psm;
  PartitionEstimate estimate;
  ClusterSummary clusters;  // parameters empty when no draw is identifiable
  bool clusters_identified = false;
  AlignedCoordinates coordinates;
  arma::mat reference;
  std::map<std::size_t, std::size_t> G_frequency;  // sampled G -> count
  std::size_t G_mode = 0;
  std::optional<double> ari;                 // against true labels
  std::optional<double> procrustes_vs_truth;  // posterior mean vs true Z
};

struct TruthInfo {
  Partition labels;
  arma::mat Z;
};

// Full post-processing of pooled draws. Coordinates and component parameters
// are aligned to the true configuration when given, else to `reference`,
// else to the highest-likelihood draw.
PosteriorSummary summarize_posterior(const std::vector<Draw>& draws,
                                     const std::optional<TruthInfo>& truth = std::nullopt,
                                     const std::optional<arma::mat>& reference = std::nullopt,
                                     std::uint64_t seed = 20240607);

// Hubert-Arabie adjusted Rand index. Throws UsageError on length mismatch.
double adjusted_rand_index(const Partition& a, const Partition& b);

}  // namespace ilpcm
