#include "brace/preprocessing.hpp"

#include <cmath>

namespace brace {

void CountMatrix::validate() const {
  if (!feature_names.empty() && static_cast<Index>(feature_names.size()) != values.cols()) {
    throw InvalidInput("count matrix has " + std::to_string(values.cols()) +
                       " columns but " + std::to_string(feature_names.size()) +
                       " feature names");
  }
  if (!sample_ids.empty() && static_cast<Index>(sample_ids.size()) != values.rows()) {
    throw InvalidInput("count matrix has " + std::to_string(values.rows()) +
                       " rows but " + std::to_string(sample_ids.size()) + " sample ids");
  }
  for (Index i = 0; i < values.rows(); ++i) {
    for (Index j = 0; j < values.cols(); ++j) {
      if (!(values(i, j) >= 0.0)) {
        throw InvalidInput("negative or NaN count at row " + std::to_string(i) +
                           ", column " + std::to_string(j));
      }
    }
  }
}

Matrix to_log_relative_abundance(const Matrix& counts, double pseudocount) {
  if (!(pseudocount >= 0.0)) throw InvalidInput("pseudocount must be nonnegative");
  Matrix out(counts.rows(), counts.cols());
  for (Index i = 0; i < counts.rows(); ++i) {
    double total = 0.0;
    for (Index j = 0; j < counts.cols(); ++j) {
      const double c = counts(i, j);
      if (!(c >= 0.0)) {
        throw InvalidInput("negative or NaN count at row " + std::to_string(i) +
                           ", column " + std::to_string(j));
      }
      out(i, j) = c == 0.0 ? pseudocount : c;
      total += out(i, j);
    }
    if (total <= 0.0) {
      throw NumericalError("division by zero: row " + std::to_string(i) +
                           " has zero total after zero replacement");
    }
    for (Index j = 0; j < counts.cols(); ++j) {
      out(i, j) = std::log(out(i, j) / total);
      if (!std::isfinite(out(i, j))) {
        throw NumericalError("log of zero relative abundance at row " + std::to_string(i) +
                             ", column " + std::to_string(j) + " (pseudocount 0)");
      }
    }
  }
  return out;
}

Matrix to_log_relative_abundance(const CountMatrix& counts, double pseudocount) {
  counts.validate();
  return to_log_relative_abundance(counts.values, pseudocount);
}

CountMatrix filter_features(const CountMatrix& counts, double min_total) {
  counts.validate();
  std::vector<Index> keep;
  for (Index j = 0; j < counts.values.cols(); ++j) {
    const double total = counts.values.col(j).sum();
    if (total < min_total) continue;
    if (total <= 0.0) {
      const std::string name =
          counts.feature_names.empty() ? std::to_string(j) : counts.feature_names[j];
      throw InvalidInput("feature '" + name + "' has zero total abundance");
    }
    keep.push_back(j);
  }
  CountMatrix out;
  out.sample_ids = counts.sample_ids;
  out.values.resize(counts.values.rows(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.values.col(static_cast<Index>(k)) = counts.values.col(keep[k]);
    if (!counts.feature_names.empty()) out.feature_names.push_back(counts.feature_names[keep[k]]);
  }
  return out;
}

Dataset center(const Matrix& X, const Vector& y) {
  if (X.rows() < 2) throw InvalidInput("centering needs at least two samples");
  if (X.rows() != y.size()) {
    throw InvalidInput("design has " + std::to_string(X.rows()) + " rows but response has " +
                       std::to_string(y.size()) + " entries");
  }
  Dataset d;
  d.x_means = X.colwise().mean().transpose();
  d.y_mean = y.mean();
  d.X = X.rowwise() - d.x_means.transpose();
  d.y = y.array() - d.y_mean;
  return d;
}

Dataset center_like(const Dataset& reference, const Matrix& X, const Vector& y) {
  if (X.cols() != reference.x_means.size()) {
    throw InvalidInput("held-out design has " + std::to_string(X.cols()) +
                       " columns, training had " + std::to_string(reference.x_means.size()));
  }
  if (X.rows() != y.size()) throw InvalidInput("held-out design/response row mismatch");
  Dataset d;
  d.x_means = reference.x_means;
  d.y_mean = reference.y_mean;
  d.feature_names = reference.feature_names;
  d.X = X.rowwise() - d.x_means.transpose();
  d.y = y.array() - d.y_mean;
  return d;
}

}  // namespace brace
