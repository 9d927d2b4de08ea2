#include <vector>

#include "brace/kernels.hpp"

namespace brace::kernels {
namespace {

// Scratch for one candidate: a (K+1) x (K+1) aggregate copy plus kernel work.
struct Scratch {
  std::vector<double> gram;
  std::vector<double> xty;
  std::vector<int> sizes;
  std::vector<double> work;

  explicit Scratch(Index K) {
    const auto k1 = static_cast<std::size_t>(K + 1);
    gram.resize(k1 * k1);
    xty.resize(k1);
    sizes.resize(k1);
    work.resize(k1 * k1 + k1 + 1);
  }
};

// Candidate c: 0 = spike, 1..K = join cluster c-1, K+1 = new cluster.
double score_one(const CandidateInputs& in, Index c, Scratch& s) {
  const ClusterAggregates& base = *in.base;
  const Index K = base.K();
  if (c == 0) {
    return log_marginal_kernel(base.gram.data(), base.gram.outerStride(), base.xty.data(),
                               base.sizes.data(), K, in.scalars, s.work.data());
  }
  const Index dim = c == K + 1 ? K + 1 : K;
  for (Index col = 0; col < K; ++col) {
    for (Index row = 0; row < K; ++row) s.gram[row + col * dim] = base.gram(row, col);
    s.xty[col] = base.xty[col];
    s.sizes[col] = base.sizes[col];
  }
  const Index k = c == K + 1 ? K : c - 1;
  if (c == K + 1) {
    for (Index l = 0; l < K; ++l) {
      s.gram[l + K * dim] = 0.0;
      s.gram[K + l * dim] = 0.0;
    }
    s.gram[K + K * dim] = 0.0;
    s.xty[K] = 0.0;
    s.sizes[K] = 0;
  }
  // Rank-two update for adding column x_j to cluster k.
  for (Index l = 0; l < K; ++l) {
    s.gram[k + l * dim] += in.cross[l];
    s.gram[l + k * dim] += in.cross[l];
  }
  s.gram[k + k * dim] += in.self_gram;
  s.xty[k] += in.self_xty;
  s.sizes[k] += 1;
  return log_marginal_kernel(s.gram.data(), dim, s.xty.data(), s.sizes.data(), dim, in.scalars,
                             s.work.data());
}

}  // namespace

void score_candidates_serial(const CandidateInputs& in, std::span<double> out) {
  const Index K = in.base->K();
  Scratch scratch(K);
  for (Index c = 0; c < K + 2; ++c) out[c] = score_one(in, c, scratch);
}

void score_candidates_parallel(const CandidateInputs& in, std::span<double> out) {
  const Index K = in.base->K();
#pragma omp parallel
  {
    Scratch scratch(K);
#pragma omp for schedule(static)
    for (Index c = 0; c < K + 2; ++c) out[c] = score_one(in, c, scratch);
  }
}

}  // namespace brace::kernels
