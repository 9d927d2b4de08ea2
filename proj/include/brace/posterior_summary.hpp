#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brace/common.hpp"
#include "brace/gibbs_sampler.hpp"

namespace brace {

enum class PartitionLoss { kBinder, kVI };

const char* to_string(PartitionLoss loss);
PartitionLoss parse_loss(const std::string& s);

enum class SelectionRule {
  kCredibleInterval,     // interval excludes zero
  kInclusionProbability  // P(z_j != 0) >= threshold
};

struct PosteriorSummary {
  double level = 0.95;
  Vector beta_mean;
  Vector ci_lower;
  Vector ci_upper;
  Vector inclusion_prob;
  std::vector<bool> selected;
  /// Reported clustering, 0 = spike. Empty until a partition is estimated.
  Labels point_partition;
};

/// Equal-tailed interval from linearly interpolated empirical quantiles.
double empirical_quantile(std::vector<double> values, double prob);

/// Coordinatewise mean, equal-tailed `level` intervals, selection by
/// "interval excludes zero", and inclusion probabilities.
PosteriorSummary credible_interval_select(const ChainTrace& trace, double level);

/// Fraction of samples in which features i and j share a label; the spike
/// counts as a shared cluster.
Matrix coclustering_matrix(const ChainTrace& trace);

/// Canonical form: labels renumbered 0, 1, ... in order of first appearance.
Labels canonical_labels(const Labels& labels);

/// Binder loss with unit costs: pairs together in one partition and apart in
/// the other.
double binder_distance(const Labels& a, const Labels& b);
/// Variation of information (natural log).
double vi_distance(const Labels& a, const Labels& b);

double expected_binder_loss(const Labels& partition, const Matrix& coclustering);
double expected_vi_loss(const Labels& partition, const IntMatrix& samples);
double expected_loss(const Labels& partition, const ChainTrace& trace, PartitionLoss loss);

/// Point estimate of the clustering minimizing posterior expected loss.
/// One search starts from the best sampled partition; `restarts` further
/// searches start from greedy sequential allocation in random item order.
/// Each is refined by single-item reassignment sweeps until no move helps.
/// Returns canonical labels (the spike is treated as an ordinary cluster).
Labels point_partition(const ChainTrace& trace, PartitionLoss loss, int restarts, Rng& rng);

/// Unselected features go to label 0; selected features keep their grouping,
/// renumbered 1.. in order of first appearance.
Labels absorb_unselected(const Labels& partition, const std::vector<bool>& selected);

struct SummaryOptions {
  double level = 0.95;
  PartitionLoss loss = PartitionLoss::kBinder;
  int restarts = 8;
  std::uint64_t seed = 0;
  SelectionRule rule = SelectionRule::kCredibleInterval;
  double inclusion_threshold = 0.5;
};

/// Credible-interval selection plus the reconciled point partition.
PosteriorSummary summarize(const ChainTrace& trace, const SummaryOptions& options);

}  // namespace brace
