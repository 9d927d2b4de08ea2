#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brace/common.hpp"
#include "brace/marginal_likelihood.hpp"
#include "brace/preprocessing.hpp"

namespace brace {

struct Hyperparams {
  double a_sigma = 0.001;
  double b_sigma = 0.001;
  double a_gamma = 0.001;
  double b_gamma = 0.001;
  double a_alpha = 1.0;
  double b_alpha = 1.0;
  // Dirichlet(alpha0/2, alpha0/2) prior on the spike weight; 2 makes it uniform.
  double alpha0 = 2.0;

  /// Vague variance priors, a_alpha = 1 / (0.75 log p)^2, b_alpha = a_alpha / sqrt(p).
  static Hyperparams defaults_for(Index p);
  void validate() const;
};

/// How candidate marginals are evaluated during label updates.
enum class MarginalStrategy {
  kAuto,        // kGram when p <= gram_max_p, otherwise kColumnSums
  kGram,        // cached p x p Gram matrix, O(p) cross products per feature
  kColumnSums,  // cached n x K cluster column sums, O(nK) per feature
  kRebuild,     // rebuild X_z for every candidate (reference path)
};

const char* to_string(MarginalStrategy s);
MarginalStrategy parse_strategy(const std::string& s);

struct ChainConfig {
  int n_iter = 5000;
  int burn_in = 3000;
  std::uint64_t seed = 0;
  int init_clusters = 5;
  int thin = 1;
  bool random_sweep = false;
  MarginalStrategy strategy = MarginalStrategy::kAuto;
  Index gram_max_p = 4000;
  // Candidate scoring switches to the OpenMP kernel at this many clusters.
  Index parallel_min_clusters = 48;

  void validate() const;
  Index stored_samples() const;
};

struct GibbsState {
  Labels z;       // 0 = spike, nonzero clusters 1..K
  Vector theta;   // one value per nonzero cluster
  double sigma2 = 1.0;
  double gamma2 = 1.0;
  double alpha = 1.0;

  Index K() const;
  /// beta_j = theta_{z_j}, or 0 when z_j = 0.
  Vector beta() const;
};

struct ChainTrace {
  std::vector<std::string> feature_names;
  std::vector<int> iteration;
  Matrix beta;  // samples x p
  IntMatrix z;  // samples x p
  std::vector<double> sigma2;
  std::vector<double> gamma2;
  std::vector<double> alpha;
  std::vector<int> K;
  std::vector<double> log_marginal;

  Index size() const { return beta.rows(); }
  Index p() const { return beta.cols(); }
  void resize(Index samples, Index p);
};

/// sigma2 | rest ~ IG(a_sigma + n/2, b_sigma + rss/2).
double draw_sigma2(double rss, Index n, const Hyperparams& hp, Rng& rng);

/// gamma2 | theta ~ IG(a_gamma + (K-1)/2, b_gamma + theta^T theta / 2); the
/// shape increment is clamped at zero for K <= 1.
double draw_gamma2(double theta_sq_norm, Index K, const Hyperparams& hp, Rng& rng);

/// Escobar & West auxiliary-variable update of the DP concentration given K
/// nonzero clusters among p_z nonzero features. Draws from the Gamma prior
/// when p_z = 0.
double draw_concentration(double alpha, Index K, Index p_z, const Hyperparams& hp, Rng& rng);

/// Collapsed Gibbs sampler for the spiked, zero-sum-constrained DP
/// regression. Owns its random stream (seeded from ChainConfig::seed) and
/// the cluster-level aggregates X_z^T X_z, X_z^T y and cluster sizes.
///
/// Label updates integrate the cluster values out; after update_labels the
/// cluster values are stale until update_theta runs.
class GibbsSampler {
 public:
  GibbsSampler(const Dataset& data, const ChainConfig& cfg, const Hyperparams& hp);

  /// Spike the smallest-|X^T y| decile, bin the rest by X^T y rank into
  /// init_clusters groups, then draw theta from its full conditional.
  void init_state();
  /// Install an explicit state (labels are compacted, aggregates rebuilt).
  void set_state(GibbsState state);

  void update_labels();
  void update_theta();
  void update_variances();
  void update_concentration();
  void sweep();

  /// Label log-probabilities for feature j (spike, clusters 1..K, new) at the
  /// current state, normalized. Does not change the state.
  Vector label_log_probabilities(Index j);

  const GibbsState& state() const { return state_; }
  const ClusterAggregates& aggregates() const { return agg_; }
  MarginalStrategy strategy() const { return strategy_; }
  double log_marginal() const;
  Rng& rng() { return rng_; }

  /// JSON snapshot of the current state, used in numerical error reports.
  std::string dump_state() const;

 private:
  MarginalScalars scalars() const;
  void refresh_aggregates();
  void cross_products(Index j, std::vector<double>& cross) const;
  void detach(Index j, const std::vector<double>& cross);
  void attach(Index j, Index cluster, const std::vector<double>& cross);
  void erase_cluster(Index k);
  void score(Index j, const std::vector<double>& cross, Vector& log_weights) const;
  void add_log_prior(Index j, Vector& log_weights) const;

  const Dataset& data_;
  ChainConfig cfg_;
  Hyperparams hp_;
  Rng rng_;
  MarginalStrategy strategy_;

  double yty_ = 0.0;
  Vector xty_;    // X^T y
  Vector diag_;   // column squared norms
  Matrix gram_;   // X^T X (kGram only)
  Matrix xz_;     // n x K cluster column sums (kColumnSums only)

  GibbsState state_;
  ClusterAggregates agg_;
  int spike_count_ = 0;
};

/// init_state, then n_iter sweeps of (labels, theta, variances,
/// concentration), storing every thin-th post-burn-in state. Numerical
/// failures are rethrown with the iteration index and a state dump.
ChainTrace run_chain(const Dataset& data, const ChainConfig& cfg, const Hyperparams& hp);

}  // namespace brace
