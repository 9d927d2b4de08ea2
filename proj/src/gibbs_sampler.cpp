#include "brace/gibbs_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "brace/constrained_gaussian.hpp"
#include "brace/kernels.hpp"
#include "brace/random.hpp"

namespace brace {

Hyperparams Hyperparams::defaults_for(Index p) {
  Hyperparams hp;
  const double lp = std::log(static_cast<double>(std::max<Index>(p, 2)));
  hp.a_alpha = 1.0 / ((0.75 * lp) * (0.75 * lp));
  hp.b_alpha = hp.a_alpha / std::sqrt(static_cast<double>(std::max<Index>(p, 1)));
  return hp;
}

void Hyperparams::validate() const {
  const double all[] = {a_sigma, b_sigma, a_gamma, b_gamma, a_alpha, b_alpha, alpha0};
  for (double v : all) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput("hyperparameters must be finite and strictly positive");
    }
  }
}

const char* to_string(MarginalStrategy s) {
  switch (s) {
    case MarginalStrategy::kAuto: return "auto";
    case MarginalStrategy::kGram: return "gram";
    case MarginalStrategy::kColumnSums: return "column-sums";
    case MarginalStrategy::kRebuild: return "rebuild";
  }
  return "auto";
}

MarginalStrategy parse_strategy(const std::string& s) {
  if (s == "auto") return MarginalStrategy::kAuto;
  if (s == "gram") return MarginalStrategy::kGram;
  if (s == "column-sums") return MarginalStrategy::kColumnSums;
  if (s == "rebuild") return MarginalStrategy::kRebuild;
  throw InvalidInput("unknown marginal strategy '" + s + "'");
}

void ChainConfig::validate() const {
  if (n_iter <= 0) throw InvalidInput("n_iter must be positive");
  if (burn_in < 0 || burn_in >= n_iter) throw InvalidInput("burn_in must lie in [0, n_iter)");
  if (thin <= 0) throw InvalidInput("thin must be positive");
  if (init_clusters <= 0) throw InvalidInput("init_clusters must be positive");
}

Index ChainConfig::stored_samples() const {
  return (n_iter - burn_in + thin - 1) / thin;
}

Index GibbsState::K() const {
  int top = 0;
  for (int label : z) top = std::max(top, label);
  return top;
}

Vector GibbsState::beta() const {
  Vector b = Vector::Zero(static_cast<Index>(z.size()));
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] > 0) b[static_cast<Index>(j)] = theta[z[j] - 1];
  }
  return b;
}

void ChainTrace::resize(Index samples, Index p) {
  const auto s = static_cast<std::size_t>(samples);
  iteration.assign(s, 0);
  beta.setZero(samples, p);
  z.setZero(samples, p);
  sigma2.assign(s, 0.0);
  gamma2.assign(s, 0.0);
  alpha.assign(s, 0.0);
  K.assign(s, 0);
  log_marginal.assign(s, 0.0);
}

double draw_sigma2(double rss, Index n, const Hyperparams& hp, Rng& rng) {
  return draw_inverse_gamma(hp.a_sigma + 0.5 * static_cast<double>(n),
                            hp.b_sigma + 0.5 * std::max(rss, 0.0), rng);
}

double draw_gamma2(double theta_sq_norm, Index K, const Hyperparams& hp, Rng& rng) {
  const double shape = hp.a_gamma + 0.5 * static_cast<double>(std::max<Index>(K - 1, 0));
  return draw_inverse_gamma(shape, hp.b_gamma + 0.5 * theta_sq_norm, rng);
}

double draw_concentration(double alpha, Index K, Index p_z, const Hyperparams& hp, Rng& rng) {
  if (p_z <= 0) return draw_gamma(hp.a_alpha, hp.b_alpha, rng);
  const double eta = draw_beta(alpha + 1.0, static_cast<double>(p_z), rng);
  const double rate = hp.b_alpha - std::log(eta);
  const double kd = static_cast<double>(K);
  const double odds = (hp.a_alpha + kd - 1.0) / (static_cast<double>(p_z) * rate);
  const double weight = odds / (1.0 + odds);
  const double shape = draw_uniform(rng) < weight ? hp.a_alpha + kd : hp.a_alpha + kd - 1.0;
  return draw_gamma(shape, rate, rng);
}

GibbsSampler::GibbsSampler(const Dataset& data, const ChainConfig& cfg, const Hyperparams& hp)
    : data_(data), cfg_(cfg), hp_(hp), rng_(cfg.seed) {
  cfg_.validate();
  hp_.validate();
  if (data_.p() == 0 || data_.n() == 0) throw InvalidInput("empty dataset");
  if (data_.y.size() != data_.n()) throw InvalidInput("design/response row mismatch");
  strategy_ = cfg_.strategy;
  if (strategy_ == MarginalStrategy::kAuto) {
    strategy_ = data_.p() <= cfg_.gram_max_p ? MarginalStrategy::kGram
                                             : MarginalStrategy::kColumnSums;
  }
  yty_ = data_.y.squaredNorm();
  xty_ = data_.X.transpose() * data_.y;
  diag_ = data_.X.colwise().squaredNorm().transpose();
  if (strategy_ == MarginalStrategy::kGram) gram_ = kernels::gram_parallel(data_.X);
  state_.z.assign(static_cast<std::size_t>(data_.p()), 0);
  spike_count_ = static_cast<int>(data_.p());
}

MarginalScalars GibbsSampler::scalars() const {
  return MarginalScalars{yty_, data_.n(), state_.sigma2, state_.gamma2};
}

double GibbsSampler::log_marginal() const {
  return log_marginal_from_aggregates(agg_, scalars());
}

std::string GibbsSampler::dump_state() const {
  nlohmann::json j;
  j["z"] = state_.z;
  j["theta"] = std::vector<double>(state_.theta.data(), state_.theta.data() + state_.theta.size());
  j["sigma2"] = state_.sigma2;
  j["gamma2"] = state_.gamma2;
  j["alpha"] = state_.alpha;
  j["cluster_sizes"] = agg_.sizes;
  j["strategy"] = to_string(strategy_);
  return j.dump();
}

void GibbsSampler::refresh_aggregates() {
  const Index p = data_.p();
  const Index K = state_.K();
  spike_count_ = 0;
  agg_.sizes.assign(static_cast<std::size_t>(K), 0);
  for (int label : state_.z) {
    if (label == 0) {
      ++spike_count_;
    } else {
      ++agg_.sizes[label - 1];
    }
  }
  switch (strategy_) {
    case MarginalStrategy::kGram: {
      // M = G Z (p x K), then X_z^T X_z = Z^T M.
      Matrix m = Matrix::Zero(p, K);
      for (Index j = 0; j < p; ++j) {
        const int label = state_.z[j];
        if (label > 0) m.col(label - 1) += gram_.col(j);
      }
      agg_.gram = Matrix::Zero(K, K);
      agg_.xty = Vector::Zero(K);
      for (Index i = 0; i < p; ++i) {
        const int label = state_.z[i];
        if (label == 0) continue;
        agg_.gram.row(label - 1) += m.row(i);
        agg_.xty[label - 1] += xty_[i];
      }
      break;
    }
    case MarginalStrategy::kColumnSums: {
      xz_ = Matrix::Zero(data_.n(), K);
      for (Index j = 0; j < p; ++j) {
        if (state_.z[j] > 0) xz_.col(state_.z[j] - 1) += data_.X.col(j);
      }
      agg_.gram = xz_.transpose() * xz_;
      agg_.xty = xz_.transpose() * data_.y;
      break;
    }
    case MarginalStrategy::kRebuild:
    case MarginalStrategy::kAuto: {
      ClusterAggregates fresh = aggregates_from_design(data_.X, data_.y, state_.z);
      agg_.gram = std::move(fresh.gram);
      agg_.xty = std::move(fresh.xty);
      break;
    }
  }
}

void GibbsSampler::set_state(GibbsState state) {
  if (static_cast<Index>(state.z.size()) != data_.p()) {
    throw InvalidInput("state has " + std::to_string(state.z.size()) + " labels for " +
                       std::to_string(data_.p()) + " features");
  }
  if (!(state.sigma2 > 0.0) || !(state.gamma2 > 0.0) || !(state.alpha > 0.0)) {
    throw InvalidInput("state variances and concentration must be positive");
  }
  state.z = compact_labels(state.z);
  const Index K = state.K();
  if (state.theta.size() != K) state.theta = Vector::Zero(K);
  state_ = std::move(state);
  refresh_aggregates();
}

void GibbsSampler::init_state() {
  const Index p = data_.p();
  if (cfg_.init_clusters > p) {
    throw InvalidInput("init_clusters (" + std::to_string(cfg_.init_clusters) +
                       ") exceeds the number of features (" + std::to_string(p) + ")");
  }
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(xty_[a]) < std::abs(xty_[b]);
  });
  const Index spiked = p / 10;
  std::vector<Index> active(order.begin() + spiked, order.end());
  std::stable_sort(active.begin(), active.end(),
                   [&](Index a, Index b) { return xty_[a] < xty_[b]; });

  GibbsState s;
  s.z.assign(static_cast<std::size_t>(p), 0);
  const Index m = static_cast<Index>(active.size());
  const Index groups = std::min<Index>(cfg_.init_clusters, m);
  for (Index r = 0; r < m; ++r) s.z[active[r]] = 1 + static_cast<int>((r * groups) / m);

  const double n = static_cast<double>(data_.n());
  double var_y = n > 1 ? data_.y.array().square().sum() / (n - 1.0) -
                             data_.y.mean() * data_.y.mean() * n / (n - 1.0)
                       : 0.0;
  s.sigma2 = var_y > 0.0 ? var_y : 1.0;
  s.gamma2 = 1.0;
  s.alpha = hp_.a_alpha / hp_.b_alpha;
  set_state(std::move(s));
  update_theta();
}

void GibbsSampler::cross_products(Index j, std::vector<double>& cross) const {
  const Index K = agg_.K();
  cross.assign(static_cast<std::size_t>(K), 0.0);
  const int own = state_.z[j];
  switch (strategy_) {
    case MarginalStrategy::kGram: {
      const double* g = gram_.col(j).data();
      const Index p = data_.p();
      for (Index i = 0; i < p; ++i) {
        const int label = state_.z[i];
        if (label > 0) cross[label - 1] += g[i];
      }
      break;
    }
    case MarginalStrategy::kColumnSums: {
      const Vector c = xz_.transpose() * data_.X.col(j);
      for (Index k = 0; k < K; ++k) cross[k] = c[k];
      break;
    }
    case MarginalStrategy::kRebuild:
    case MarginalStrategy::kAuto: {
      Matrix xz = Matrix::Zero(data_.n(), K);
      for (Index i = 0; i < data_.p(); ++i) {
        if (state_.z[i] > 0) xz.col(state_.z[i] - 1) += data_.X.col(i);
      }
      const Vector c = xz.transpose() * data_.X.col(j);
      for (Index k = 0; k < K; ++k) cross[k] = c[k];
      break;
    }
  }
  // Exclude j's own contribution.
  if (own > 0) cross[own - 1] -= diag_[j];
}

void GibbsSampler::erase_cluster(Index k) {
  const Index K = agg_.K();
  const Index tail = K - k - 1;
  if (tail > 0) {
    agg_.gram.block(k, 0, tail, K) = agg_.gram.block(k + 1, 0, tail, K).eval();
    agg_.gram.block(0, k, K, tail) = agg_.gram.block(0, k + 1, K, tail).eval();
    agg_.xty.segment(k, tail) = agg_.xty.segment(k + 1, tail).eval();
    if (strategy_ == MarginalStrategy::kColumnSums) {
      xz_.middleCols(k, tail) = xz_.middleCols(k + 1, tail).eval();
    }
  }
  agg_.gram.conservativeResize(K - 1, K - 1);
  agg_.xty.conservativeResize(K - 1);
  if (strategy_ == MarginalStrategy::kColumnSums) xz_.conservativeResize(Eigen::NoChange, K - 1);
  agg_.sizes.erase(agg_.sizes.begin() + k);
  const int removed = static_cast<int>(k) + 1;
  for (int& label : state_.z) {
    if (label > removed) --label;
  }
}

void GibbsSampler::detach(Index j, const std::vector<double>& cross) {
  const int own = state_.z[j];
  if (own == 0) {
    --spike_count_;
    return;
  }
  const Index k = own - 1;
  const Index K = agg_.K();
  for (Index l = 0; l < K; ++l) {
    agg_.gram(k, l) -= cross[l];
    agg_.gram(l, k) -= cross[l];
  }
  agg_.gram(k, k) -= diag_[j];
  agg_.xty[k] -= xty_[j];
  if (strategy_ == MarginalStrategy::kColumnSums) xz_.col(k) -= data_.X.col(j);
  state_.z[j] = 0;
  if (--agg_.sizes[k] == 0) erase_cluster(k);
}

void GibbsSampler::attach(Index j, Index cluster, const std::vector<double>& cross) {
  // cluster: 0 = spike, 1..K existing, K+1 new.
  if (cluster == 0) {
    state_.z[j] = 0;
    ++spike_count_;
    return;
  }
  Index K = agg_.K();
  if (cluster == K + 1) {
    agg_.gram.conservativeResize(K + 1, K + 1);
    agg_.gram.row(K).setZero();
    agg_.gram.col(K).setZero();
    agg_.xty.conservativeResize(K + 1);
    agg_.xty[K] = 0.0;
    agg_.sizes.push_back(0);
    if (strategy_ == MarginalStrategy::kColumnSums) {
      xz_.conservativeResize(Eigen::NoChange, K + 1);
      xz_.col(K).setZero();
    }
    ++K;
  }
  const Index k = cluster - 1;
  for (Index l = 0; l < static_cast<Index>(cross.size()); ++l) {
    agg_.gram(k, l) += cross[l];
    agg_.gram(l, k) += cross[l];
  }
  agg_.gram(k, k) += diag_[j];
  agg_.xty[k] += xty_[j];
  ++agg_.sizes[k];
  if (strategy_ == MarginalStrategy::kColumnSums) xz_.col(k) += data_.X.col(j);
  state_.z[j] = static_cast<int>(cluster);
}

void GibbsSampler::score(Index j, const std::vector<double>& cross, Vector& log_weights) const {
  const Index K = agg_.K();
  log_weights.resize(K + 2);
  if (strategy_ == MarginalStrategy::kRebuild) {
    Labels candidate = state_.z;
    for (Index c = 0; c < K + 2; ++c) {
      candidate[j] = static_cast<int>(c);
      log_weights[c] = log_marginal_y(data_.y, data_.X, candidate, state_.sigma2, state_.gamma2);
    }
    return;
  }
  kernels::CandidateInputs in;
  in.base = &agg_;
  in.cross = cross;
  in.self_gram = diag_[j];
  in.self_xty = xty_[j];
  in.scalars = scalars();
  std::span<double> out(log_weights.data(), static_cast<std::size_t>(K + 2));
  if (K >= cfg_.parallel_min_clusters) {
    kernels::score_candidates_parallel(in, out);
  } else {
    kernels::score_candidates_serial(in, out);
  }
  for (Index c = 0; c < K + 2; ++c) {
    if (std::isnan(log_weights[c])) {
      throw NumericalError("candidate marginal for feature " + std::to_string(j) +
                               " is not finite (candidate " + std::to_string(c) + ")",
                           dump_state());
    }
  }
}

void GibbsSampler::add_log_prior(Index j, Vector& log_weights) const {
  (void)j;
  const Index K = agg_.K();
  const double p = static_cast<double>(data_.p());
  // Counts exclude feature j, which has been detached.
  const double m_spike = spike_count_;
  const double p_z = p - 1.0 - m_spike;
  const double psi0 = (m_spike + 0.5 * hp_.alpha0) / (p - 1.0 + hp_.alpha0);
  const double log_slab = std::log1p(-psi0) - std::log(p_z + state_.alpha);
  log_weights[0] += std::log(psi0);
  for (Index k = 0; k < K; ++k) {
    log_weights[k + 1] += log_slab + std::log(static_cast<double>(agg_.sizes[k]));
  }
  log_weights[K + 1] += log_slab + std::log(state_.alpha);
}

Vector GibbsSampler::label_log_probabilities(Index j) {
  const GibbsState saved_state = state_;
  const ClusterAggregates saved_agg = agg_;
  const Matrix saved_xz = xz_;
  const int saved_spike = spike_count_;

  std::vector<double> cross;
  cross_products(j, cross);
  const int own = state_.z[j];
  const Index before = agg_.K();
  detach(j, cross);
  if (agg_.K() != before) cross.erase(cross.begin() + (own - 1));
  Vector lw;
  score(j, cross, lw);
  add_log_prior(j, lw);
  const double top = lw.maxCoeff();
  const double lse = top + std::log((lw.array() - top).exp().sum());
  lw.array() -= lse;

  state_ = saved_state;
  agg_ = saved_agg;
  xz_ = saved_xz;
  spike_count_ = saved_spike;
  return lw;
}

void GibbsSampler::update_labels() {
  const Index p = data_.p();
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  if (cfg_.random_sweep) std::shuffle(order.begin(), order.end(), rng_);

  std::vector<double> cross;
  Vector log_weights;
  for (Index j : order) {
    cross_products(j, cross);
    const int own = state_.z[j];
    const Index before = agg_.K();
    detach(j, cross);
    // j was a singleton: its cluster is gone and later indices shifted down.
    if (agg_.K() != before) cross.erase(cross.begin() + (own - 1));
    score(j, cross, log_weights);
    add_log_prior(j, log_weights);
    const Index choice = draw_categorical_log(log_weights, rng_);
    attach(j, choice, cross);
  }
  // Exact aggregates for the continuous updates; incremental updates drift.
  refresh_aggregates();
  state_.theta = Vector::Zero(agg_.K());
}

void GibbsSampler::update_theta() {
  const Index K = agg_.K();
  if (K <= 1) {
    state_.theta = Vector::Zero(K);
    return;
  }
  Matrix precision = agg_.gram / state_.sigma2;
  precision.diagonal().array() += 1.0 / state_.gamma2;
  const Vector linear = agg_.xty / state_.sigma2;
  Vector f(K);
  for (Index k = 0; k < K; ++k) f[k] = agg_.sizes[k];
  try {
    const HyperplaneGaussian dist = HyperplaneGaussian::from_precision(
        precision, linear, HyperplaneConstraint::weighted_sum(f));
    state_.theta = dist.draw(rng_);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("theta update: ") + e.what(), dump_state());
  }
}

void GibbsSampler::update_variances() {
  const Vector& theta = state_.theta;
  const double rss = yty_ - 2.0 * theta.dot(agg_.xty) + theta.dot(agg_.gram * theta);
  state_.sigma2 = draw_sigma2(rss, data_.n(), hp_, rng_);
  state_.gamma2 = draw_gamma2(theta.squaredNorm(), agg_.K(), hp_, rng_);
}

void GibbsSampler::update_concentration() {
  const Index p_z = data_.p() - spike_count_;
  state_.alpha = draw_concentration(state_.alpha, agg_.K(), p_z, hp_, rng_);
}

void GibbsSampler::sweep() {
  update_labels();
  update_theta();
  update_variances();
  update_concentration();
}

ChainTrace run_chain(const Dataset& data, const ChainConfig& cfg, const Hyperparams& hp) {
  GibbsSampler sampler(data, cfg, hp);
  ChainTrace trace;
  trace.feature_names = data.feature_names;
  trace.resize(cfg.stored_samples(), data.p());
  int iter = 0;
  try {
    sampler.init_state();
    Index row = 0;
    for (iter = 1; iter <= cfg.n_iter; ++iter) {
      sampler.sweep();
      if (iter <= cfg.burn_in || (iter - cfg.burn_in - 1) % cfg.thin != 0) continue;
      const GibbsState& s = sampler.state();
      trace.iteration[row] = iter;
      trace.beta.row(row) = s.beta().transpose();
      for (Index j = 0; j < data.p(); ++j) trace.z(row, j) = s.z[j];
      trace.sigma2[row] = s.sigma2;
      trace.gamma2[row] = s.gamma2;
      trace.alpha[row] = s.alpha;
      trace.K[row] = static_cast<int>(sampler.aggregates().K());
      trace.log_marginal[row] = sampler.log_marginal();
      ++row;
    }
  } catch (const NumericalError& e) {
    std::string dump = e.state_dump().empty() ? sampler.dump_state() : e.state_dump();
    throw NumericalError("iteration " + std::to_string(iter) + ": " + e.what(), dump);
  }
  return trace;
}

}  // namespace brace
