#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brace/common.hpp"
#include "brace/preprocessing.hpp"

namespace brace {

enum class CovarianceCase { kDep1, kDep2 };

const char* to_string(CovarianceCase c);
CovarianceCase parse_covariance_case(const std::string& s);

struct SimConfig {
  Index n = 300;
  Index p = 100;
  CovarianceCase cov_case = CovarianceCase::kDep1;
  double rho = 0.5;
  double snr = 1.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;

  void validate() const;
};

/// Number of leading slots occupied by the coefficient template.
inline constexpr Index kTemplateSlots = 37;

struct TrueCoefficients {
  Vector beta;
  Labels partition;  // 0 for zero coefficients, 1..8 for the distinct values
};

/// The benchmark coefficient template shifted by the mean of its nonzero
/// entries so it sums to exactly zero, padded with zeros to length p.
TrueCoefficients build_true_beta(Index p);

/// Dep1: rho^|i-j|. Dep2: within-cluster 0.75 - 0.015|i-j| and between-cluster
/// 0.4 - 0.02|i-j| among nonzero-labeled features, floored at 0; unit
/// diagonal; repaired to positive definite by eigenvalue flooring at 1e-6.
Matrix build_covariance(const SimConfig& cfg, const Labels& partition);

struct SimulationTruth {
  Vector beta_true;
  Labels partition_true;
  double sigma_true = 0.0;
  CovarianceCase cov_case = CovarianceCase::kDep1;
  double rho = 0.0;
};

struct SimulatedData {
  Matrix composition;  // n x p relative abundances, rows sum to one
  Vector response;     // raw (uncentered) response
  std::vector<Index> train_rows;
  std::vector<Index> test_rows;
  std::vector<std::string> feature_names;
  std::vector<std::string> sample_ids;
  Dataset train;  // centered with training means
  Dataset test;   // centered with the same training means
  SimulationTruth truth;
};

/// Logistic-normal compositions U ~ N(mu, Sigma), O = softmax rows,
/// X = log O, y = X beta + N(0, sigma^2) with sigma = mean|beta_nz| / snr,
/// then a seeded train/test split.
SimulatedData simulate_dataset(const SimConfig& cfg);

}  // namespace brace
