#pragma once

// Data-parallel inner loops. Each kernel has a serial reference version and
// an OpenMP version; tests hold the two to identical results and the
// benchmark target compares their timings.

#include <span>

#include "brace/common.hpp"
#include "brace/marginal_likelihood.hpp"

namespace brace::kernels {

/// X^T X.
Matrix gram_serial(const Matrix& X);
Matrix gram_parallel(const Matrix& X);

/// Everything needed to score one feature j against all label candidates
/// while the rest of the labelling is frozen. The aggregates describe the
/// configuration with j removed; `cross[k]` = sum of G(i, j) over members i of
/// cluster k, `self_gram` = x_j^T x_j and `self_xty` = x_j^T y.
struct CandidateInputs {
  const ClusterAggregates* base = nullptr;
  std::span<const double> cross;
  double self_gram = 0.0;
  double self_xty = 0.0;
  MarginalScalars scalars;
};

/// Fills out[0] (j in the spike), out[1..K] (j joins cluster k) and out[K+1]
/// (j opens a new cluster) with collapsed log-marginals. `out` has size K+2.
/// Non-positive-definite candidates come back as NaN.
void score_candidates_serial(const CandidateInputs& in, std::span<double> out);
void score_candidates_parallel(const CandidateInputs& in, std::span<double> out);

/// Entry (i, j) = fraction of rows (samples) of `z` in which features i and j
/// share a label. Label 0 counts as a shared cluster.
Matrix coclustering_serial(const IntMatrix& z);
Matrix coclustering_parallel(const IntMatrix& z);

}  // namespace brace::kernels
