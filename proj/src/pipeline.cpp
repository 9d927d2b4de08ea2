#include "brace/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "brace/random.hpp"

namespace brace {

EvalReport evaluate(const PosteriorSummary& summary, const Dataset& test,
                    const SimulationTruth& truth) {
  EvalReport r;
  r.pe = prediction_error(test.y, test.X, summary.beta_mean);
  r.l2 = l2_loss(truth.beta_true, summary.beta_mean);
  const SelectionErrors e = selection_errors(summary.selected, truth.beta_true);
  r.fp = e.fp;
  r.fn = e.fn;
  r.ari = adjusted_rand_index(summary.point_partition, truth.partition_true);
  return r;
}

double max_abs_constraint(const ChainTrace& trace) {
  double worst = 0.0;
  for (Index s = 0; s < trace.size(); ++s) worst = std::max(worst, std::abs(trace.beta.row(s).sum()));
  return worst;
}

ReplicateSeeds ReplicateSeeds::derive(std::uint64_t base, std::uint64_t config_index,
                                      std::uint64_t replicate) {
  const std::uint64_t rep = derive_seed(derive_seed(base, config_index), replicate);
  return {derive_seed(rep, 0), derive_seed(rep, 1), derive_seed(rep, 2)};
}

ReplicateResult run_replicate(const SimConfig& sim, const ChainConfig& chain,
                              const SummaryOptions& options) {
  ReplicateResult out;
  out.data = simulate_dataset(sim);
  const auto start = std::chrono::steady_clock::now();
  out.trace = run_chain(out.data.train, chain, Hyperparams::defaults_for(out.data.train.p()));
  out.fit_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.summary = summarize(out.trace, options);
  out.report = evaluate(out.summary, out.data.test, out.data.truth);
  out.max_abs_sum = max_abs_constraint(out.trace);
  return out;
}

}  // namespace brace
