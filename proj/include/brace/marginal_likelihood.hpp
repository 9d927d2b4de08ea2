#pragma once

#include <span>
#include <vector>

#include "brace/common.hpp"

namespace brace {

/// Sizes of the nonzero clusters (f), the spike size (p0) and p_z = p - p0.
struct ClusterFrequencies {
  std::vector<int> f;
  int p0 = 0;
  int p_z = 0;

  Index K() const { return static_cast<Index>(f.size()); }
};

/// Renumber nonzero labels to 1..K preserving their relative order; 0 stays 0.
Labels compact_labels(std::span<const int> z);

/// Cluster sizes after compaction. Negative labels are rejected.
ClusterFrequencies cluster_frequencies(std::span<const int> z);

/// log det(I + f* f*^T / f_K^2) = log(sum_k f_k^2) - 2 log f_K, where f* drops
/// the last cluster. Zero for K <= 1.
double log_det_B(std::span<const int> f);
inline double log_det_B(const ClusterFrequencies& freq) { return log_det_B(freq.f); }

/// Quadratic form in theta restricted to f^T theta = 0, rewritten in the free
/// coordinates theta* = (theta_1..theta_{K-1}):
///   A* = A11 - (A12 f*^T + f* A12^T) / f_K + a_KK f* f*^T / f_K^2
///   b~ = b* - (b_K / f_K) f*
struct ReducedQuadratic {
  Matrix A_star;
  Vector b_tilde;
};

ReducedQuadratic reduce_quadratic(const Matrix& A, const Vector& b, std::span<const int> f);

/// Cluster-level sufficient statistics: X_z^T X_z, X_z^T y and cluster sizes,
/// where X_z sums the columns of X within each nonzero cluster.
struct ClusterAggregates {
  Matrix gram;
  Vector xty;
  std::vector<int> sizes;

  Index K() const { return static_cast<Index>(sizes.size()); }
};

ClusterAggregates aggregates_from_design(const Matrix& X, const Vector& y,
                                         std::span<const int> z);

/// Scalars shared by every marginal evaluation of one label sweep.
struct MarginalScalars {
  double yty = 0.0;
  Index n = 0;
  double sigma2 = 1.0;
  double gamma2 = 1.0;
};

/// log N(y; 0, sigma2 I) evaluated from y^T y.
double log_null_marginal(const MarginalScalars& s);

/// Allocation-free evaluation of the collapsed marginal on raw aggregates.
/// `gram` is K x K column-major with leading dimension `ld`; `work` must hold
/// at least K*K + K doubles. Returns NaN when A* is not positive definite.
/// K <= 1 returns the null marginal (a lone cluster is forced to zero).
double log_marginal_kernel(const double* gram, Index ld, const double* xty, const int* sizes,
                           Index K, const MarginalScalars& s, double* work);

/// log f(y | sigma2, gamma2, z, X) with the cluster values integrated out
/// under f^T theta = 0, evaluated from cluster aggregates. Throws
/// NumericalError with the offending state if the result is not finite.
double log_marginal_from_aggregates(const ClusterAggregates& agg, const MarginalScalars& s);

/// Same quantity computed directly from (y, X, z): builds X_z, then A, b, the
/// reduced quadratic, and evaluates it with an Eigen Cholesky.
double log_marginal_y(const Vector& y, const Matrix& X, std::span<const int> z, double sigma2,
                      double gamma2);

}  // namespace brace
