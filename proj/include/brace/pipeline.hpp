#pragma once

#include <cstdint>

#include "brace/gibbs_sampler.hpp"
#include "brace/metrics.hpp"
#include "brace/posterior_summary.hpp"
#include "brace/simulation.hpp"

namespace brace {

/// Scores a posterior summary on held-out data and against the truth.
/// beta_hat is the posterior mean; FP/FN use the summary's selection.
EvalReport evaluate(const PosteriorSummary& summary, const Dataset& test,
                    const SimulationTruth& truth);

/// Largest |1^T beta| over the stored samples.
double max_abs_constraint(const ChainTrace& trace);

/// Independent streams for one replicate, all derived from one seed.
struct ReplicateSeeds {
  std::uint64_t simulate = 0;
  std::uint64_t chain = 0;
  std::uint64_t summary = 0;

  static ReplicateSeeds derive(std::uint64_t base, std::uint64_t config_index,
                               std::uint64_t replicate);
};

struct ReplicateResult {
  SimulatedData data;
  ChainTrace trace;
  PosteriorSummary summary;
  EvalReport report;
  double max_abs_sum = 0.0;
  double fit_seconds = 0.0;
};

/// simulate -> run_chain -> summarize -> evaluate. The seeds in `sim`,
/// `chain` and `options` are used as given.
ReplicateResult run_replicate(const SimConfig& sim, const ChainConfig& chain,
                              const SummaryOptions& options);

}  // namespace brace
