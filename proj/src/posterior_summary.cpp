#include "brace/posterior_summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "brace/kernels.hpp"

namespace brace {
namespace {

void require_nonempty(const ChainTrace& trace) {
  if (trace.size() == 0) throw InvalidInput("trace has no samples");
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

Labels row_labels(const IntMatrix& z, Index s) {
  Labels out(static_cast<std::size_t>(z.cols()));
  for (Index j = 0; j < z.cols(); ++j) out[j] = z(s, j);
  return out;
}

// Local search over partitions. Labels of allocated items are >= 0; -1 marks
// an item not yet allocated (sequential allocation phase).
class PartitionSearch {
 public:
  PartitionSearch(PartitionLoss loss, const Matrix& cocluster, const IntMatrix& samples)
      : loss_(loss), cocluster_(cocluster), p_(cocluster.rows()) {
    if (loss_ == PartitionLoss::kVI) {
      samples_ = samples;  // column-major copy: one contiguous column per item
      xlogx_table_.resize(static_cast<std::size_t>(p_ + 2));
      for (Index k = 0; k < p_ + 2; ++k) xlogx_table_[k] = xlogx(static_cast<double>(k));
    }
  }

  Labels from_sequential(const std::vector<Index>& order) {
    labels_.assign(static_cast<std::size_t>(p_), -1);
    sizes_.clear();
    for (Index i : order) place(i);
    refine();
    return canonical_labels(labels_);
  }

  Labels from_start(const Labels& start) {
    labels_ = canonical_labels(start);
    sizes_.assign(static_cast<std::size_t>(*std::max_element(labels_.begin(), labels_.end()) + 1),
                  0);
    for (int l : labels_) ++sizes_[l];
    refine();
    return canonical_labels(labels_);
  }

 private:
  // Cost of putting item i into each existing cluster; the last entry is a
  // new cluster. Only allocated items other than i contribute.
  void costs(Index i, std::vector<double>& out) {
    const Index K = static_cast<Index>(sizes_.size());
    out.assign(static_cast<std::size_t>(K + 1), 0.0);
    if (loss_ == PartitionLoss::kBinder) {
      for (Index m = 0; m < p_; ++m) {
        const int l = labels_[m];
        if (m == i || l < 0) continue;
        out[l] += 1.0 - 2.0 * cocluster_(i, m);
      }
      return;
    }
    const Index S = samples_.rows();
    counts_.assign(static_cast<std::size_t>(K * S), 0);
    const int* zi = samples_.col(i).data();
    for (Index m = 0; m < p_; ++m) {
      const int l = labels_[m];
      if (m == i || l < 0) continue;
      const int* zm = samples_.col(m).data();
      int* c = counts_.data() + l * S;
      for (Index s = 0; s < S; ++s) c[s] += zm[s] == zi[s];
    }
    for (Index k = 0; k < K; ++k) {
      if (sizes_[k] == 0) continue;
      const int* c = counts_.data() + k * S;
      double joint = 0.0;
      for (Index s = 0; s < S; ++s) joint += xlogx_table_[c[s] + 1] - xlogx_table_[c[s]];
      const int n = sizes_[k] - (labels_[i] == static_cast<int>(k) ? 1 : 0);
      out[k] = xlogx_table_[n + 1] - xlogx_table_[n] - 2.0 * joint / static_cast<double>(S);
    }
  }

  // Allocate item i to its cheapest cluster; returns true if its label changed.
  bool place(Index i) {
    const int current = labels_[i];
    costs(i, cost_buffer_);
    const Index K = static_cast<Index>(sizes_.size());
    const bool singleton = current >= 0 && sizes_[current] == 1;
    // Opening a new cluster costs cost_buffer_[K]; a singleton already is one.
    Index best = singleton ? current : K;
    double best_cost = cost_buffer_[K];
    for (Index k = 0; k < K; ++k) {
      const int occupancy = sizes_[k] - (current == static_cast<int>(k) ? 1 : 0);
      if (occupancy == 0) continue;
      if (cost_buffer_[k] < best_cost - 1e-12) {
        best = k;
        best_cost = cost_buffer_[k];
      }
    }
    if (current >= 0) {
      // Ties keep the current allocation so sweeps terminate.
      const double current_cost = singleton ? cost_buffer_[K] : cost_buffer_[current];
      if (current_cost <= best_cost + 1e-12) return false;
      --sizes_[current];
    }
    if (best == K) {
      auto empty = std::find(sizes_.begin(), sizes_.end(), 0);
      if (empty != sizes_.end()) {
        best = empty - sizes_.begin();
      } else {
        sizes_.push_back(0);
      }
    }
    labels_[i] = static_cast<int>(best);
    ++sizes_[best];
    return current >= 0;
  }

  void refine() {
    for (int pass = 0; pass < 100; ++pass) {
      bool changed = false;
      for (Index i = 0; i < p_; ++i) changed |= place(i);
      if (!changed) break;
    }
  }

  PartitionLoss loss_;
  const Matrix& cocluster_;
  Index p_;
  Eigen::MatrixXi samples_;
  std::vector<double> xlogx_table_;
  Labels labels_;
  std::vector<int> sizes_;
  std::vector<int> counts_;
  std::vector<double> cost_buffer_;
};

}  // namespace

const char* to_string(PartitionLoss loss) {
  return loss == PartitionLoss::kBinder ? "binder" : "vi";
}

PartitionLoss parse_loss(const std::string& s) {
  if (s == "binder") return PartitionLoss::kBinder;
  if (s == "vi") return PartitionLoss::kVI;
  throw InvalidInput("unknown partition loss '" + s + "'");
}

double empirical_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

PosteriorSummary credible_interval_select(const ChainTrace& trace, double level) {
  require_nonempty(trace);
  if (!(level > 0.0 && level < 1.0)) throw InvalidInput("credible level must lie in (0, 1)");
  const Index p = trace.p();
  const Index S = trace.size();
  PosteriorSummary out;
  out.level = level;
  out.beta_mean = trace.beta.colwise().mean().transpose();
  out.ci_lower.resize(p);
  out.ci_upper.resize(p);
  out.inclusion_prob.resize(p);
  out.selected.assign(static_cast<std::size_t>(p), false);
  const double tail = 0.5 * (1.0 - level);
  std::vector<double> column(static_cast<std::size_t>(S));
  for (Index j = 0; j < p; ++j) {
    Index nonzero = 0;
    for (Index s = 0; s < S; ++s) {
      column[s] = trace.beta(s, j);
      nonzero += trace.z(s, j) != 0;
    }
    out.ci_lower[j] = empirical_quantile(column, tail);
    out.ci_upper[j] = empirical_quantile(column, 1.0 - tail);
    out.inclusion_prob[j] = static_cast<double>(nonzero) / static_cast<double>(S);
    out.selected[j] = out.ci_lower[j] > 0.0 || out.ci_upper[j] < 0.0;
  }
  return out;
}

Matrix coclustering_matrix(const ChainTrace& trace) {
  require_nonempty(trace);
  return kernels::coclustering_parallel(trace.z);
}

Labels canonical_labels(const Labels& labels) {
  std::map<int, int> remap;
  Labels out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(labels[i], static_cast<int>(remap.size()));
    out[i] = it->second;
  }
  return out;
}

double binder_distance(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw InvalidInput("partitions have different lengths");
  double loss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      loss += (a[i] == a[j]) != (b[i] == b[j]);
    }
  }
  return loss;
}

double vi_distance(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw InvalidInput("partitions have different lengths");
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> cab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    cab[{a[i], b[i]}] += 1.0;
  }
  double sum = 0.0;
  for (const auto& [k, v] : ca) sum += xlogx(v);
  for (const auto& [k, v] : cb) sum += xlogx(v);
  for (const auto& [k, v] : cab) sum -= 2.0 * xlogx(v);
  return sum / static_cast<double>(a.size());
}

double expected_binder_loss(const Labels& partition, const Matrix& coclustering) {
  const Index p = static_cast<Index>(partition.size());
  if (coclustering.rows() != p) throw InvalidInput("partition/co-clustering size mismatch");
  double loss = 0.0;
  for (Index i = 0; i < p; ++i) {
    for (Index j = i + 1; j < p; ++j) {
      loss += partition[i] == partition[j] ? 1.0 - coclustering(i, j) : coclustering(i, j);
    }
  }
  return loss;
}

double expected_vi_loss(const Labels& partition, const IntMatrix& samples) {
  if (samples.rows() == 0) throw InvalidInput("no samples");
  double total = 0.0;
  for (Index s = 0; s < samples.rows(); ++s) total += vi_distance(partition, row_labels(samples, s));
  return total / static_cast<double>(samples.rows());
}

double expected_loss(const Labels& partition, const ChainTrace& trace, PartitionLoss loss) {
  require_nonempty(trace);
  if (loss == PartitionLoss::kBinder) {
    return expected_binder_loss(partition, coclustering_matrix(trace));
  }
  return expected_vi_loss(partition, trace.z);
}

Labels point_partition(const ChainTrace& trace, PartitionLoss loss, int restarts, Rng& rng) {
  require_nonempty(trace);
  if (restarts < 1) throw InvalidInput("restarts must be positive");
  const Index p = trace.p();
  const Matrix cocluster = coclustering_matrix(trace);
  auto evaluate = [&](const Labels& c) {
    return loss == PartitionLoss::kBinder ? expected_binder_loss(c, cocluster)
                                          : expected_vi_loss(c, trace.z);
  };

  std::set<Labels> distinct;
  for (Index s = 0; s < trace.size(); ++s) distinct.insert(canonical_labels(row_labels(trace.z, s)));
  Labels best_sampled;
  double best_sampled_loss = std::numeric_limits<double>::infinity();
  for (const Labels& c : distinct) {
    const double value = evaluate(c);
    if (value < best_sampled_loss) {
      best_sampled_loss = value;
      best_sampled = c;
    }
  }

  PartitionSearch search(loss, cocluster, trace.z);
  Labels best = search.from_start(best_sampled);
  double best_loss = evaluate(best);
  if (best_sampled_loss < best_loss) {
    best = best_sampled;
    best_loss = best_sampled_loss;
  }
  std::vector<Index> order(static_cast<std::size_t>(p));
  for (int r = 0; r < restarts; ++r) {
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    Labels candidate = search.from_sequential(order);
    const double value = evaluate(candidate);
    if (value < best_loss - 1e-12) {
      best = std::move(candidate);
      best_loss = value;
    }
  }
  return best;
}

Labels absorb_unselected(const Labels& partition, const std::vector<bool>& selected) {
  if (partition.size() != selected.size()) throw InvalidInput("partition/selection size mismatch");
  std::map<int, int> remap;
  Labels out(partition.size(), 0);
  for (std::size_t j = 0; j < partition.size(); ++j) {
    if (!selected[j]) continue;
    auto [it, inserted] = remap.try_emplace(partition[j], static_cast<int>(remap.size()) + 1);
    out[j] = it->second;
  }
  return out;
}

PosteriorSummary summarize(const ChainTrace& trace, const SummaryOptions& options) {
  PosteriorSummary out = credible_interval_select(trace, options.level);
  if (options.rule == SelectionRule::kInclusionProbability) {
    for (Index j = 0; j < trace.p(); ++j) {
      out.selected[j] = out.inclusion_prob[j] >= options.inclusion_threshold;
    }
  }
  Rng rng(options.seed);
  const Labels raw = point_partition(trace, options.loss, options.restarts, rng);
  out.point_partition = absorb_unselected(raw, out.selected);
  return out;
}

}  // namespace brace
