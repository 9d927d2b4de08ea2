#pragma once

#include "brace/common.hpp"

namespace brace {

struct GaussianParams {
  Vector mean;
  Matrix cov;

  void validate() const;
};

/// Linear equality constraint {theta : H theta = q}. H is m x K with full row
/// rank and m < K. The regression model only ever uses m = 1, H = f^T, q = 0.
struct HyperplaneConstraint {
  Matrix H;
  Vector q;

  static HyperplaneConstraint weighted_sum(const Vector& weights, double value = 0.0);
  void validate(Index dim) const;
};

/// Mean and covariance of N(mean, cov) conditioned on H theta = q:
///   mu_T    = mu + S H^T (H S H^T)^{-1} (q - H mu)
///   Sigma_T = S - S H^T (H S H^T)^{-1} H S
/// Eigenvalues of Sigma_T below 1e-12 are set to zero.
GaussianParams conditional_moments(const GaussianParams& params,
                                   const HyperplaneConstraint& constraint);

/// Exact sampler for a Gaussian restricted to a hyperplane. Draws an
/// unconstrained theta~ ~ N(mu, Sigma) and projects it with
///   theta = theta~ + Sigma H^T (H Sigma H^T)^{-1} (q - H theta~).
/// Factorizations are computed once at construction; each draw is O(K^2).
class HyperplaneGaussian {
 public:
  /// Covariance form.
  HyperplaneGaussian(const GaussianParams& params, const HyperplaneConstraint& constraint);

  /// Precision form: N(Q^{-1} linear, Q^{-1}). Avoids inverting Q, which is
  /// how the Gibbs full conditional for the cluster values arrives.
  static HyperplaneGaussian from_precision(const Matrix& precision, const Vector& linear,
                                           const HyperplaneConstraint& constraint);

  Vector draw(Rng& rng) const;

  const Vector& unconstrained_mean() const { return mean_; }
  /// Conditional mean implied by the projection (mu_T).
  Vector constrained_mean() const;

 private:
  HyperplaneGaussian() = default;
  void build_projection(const Matrix& cov_h);

  Vector mean_;
  // Either a lower Cholesky factor of Sigma (covariance form) or of Q
  // (precision form); draws use L eps or L^{-T} eps respectively.
  Matrix factor_;
  bool precision_form_ = false;
  HyperplaneConstraint constraint_;
  Matrix gain_;  // Sigma H^T (H Sigma H^T)^{-1}, K x m
};

/// Convenience wrapper building a HyperplaneGaussian for a single draw.
Vector sample_hyperplane_gaussian(const GaussianParams& params,
                                  const HyperplaneConstraint& constraint, Rng& rng);

}  // namespace brace
