#pragma once

#include <vector>

#include "brace/common.hpp"

namespace brace {

struct SelectionErrors {
  int fp = 0;
  int fn = 0;
};

struct EvalReport {
  double pe = 0.0;
  double l2 = 0.0;
  int fp = 0;
  int fn = 0;
  double ari = 0.0;
};

/// Mean squared residual (1/n) ||y - X beta||^2.
double prediction_error(const Vector& y_test, const Matrix& X_test, const Vector& beta_hat);

double l2_loss(const Vector& beta_true, const Vector& beta_hat);

SelectionErrors selection_errors(const std::vector<bool>& selected, const Vector& beta_true);

/// Adjusted Rand index from the contingency table of the two labelings.
/// Returns 1 when both partitions are all-one-cluster or all-singletons
/// (the 0/0 case, which only arises for identical partitions).
double adjusted_rand_index(const Labels& a, const Labels& b);

}  // namespace brace
