#pragma once

#include <string>
#include <vector>

#include "brace/common.hpp"

namespace brace {

/// Raw abundance table: one row per sample, one column per feature.
struct CountMatrix {
  Matrix values;
  std::vector<std::string> feature_names;
  std::vector<std::string> sample_ids;

  /// Throws InvalidInput on negative entries or mismatched name lists.
  void validate() const;
};

/// Centered design matrix and response. The training means are kept so that
/// held-out samples can be centered the same way.
struct Dataset {
  Matrix X;
  Vector y;
  Vector x_means;
  double y_mean = 0.0;
  std::vector<std::string> feature_names;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

/// Replace zeros by `pseudocount`, scale each row to sum to one, take logs.
Matrix to_log_relative_abundance(const Matrix& counts, double pseudocount = 0.5);
Matrix to_log_relative_abundance(const CountMatrix& counts, double pseudocount = 0.5);

/// Drop features whose column total is below `min_total`. Any feature left
/// with zero total abundance is an error rather than silently removed.
CountMatrix filter_features(const CountMatrix& counts, double min_total);

Dataset center(const Matrix& X, const Vector& y);

/// Center (X, y) with the means stored in `reference` (held-out data).
Dataset center_like(const Dataset& reference, const Matrix& X, const Vector& y);

}  // namespace brace
