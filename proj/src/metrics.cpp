#include "brace/metrics.hpp"

#include <map>

namespace brace {
namespace {

double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

double prediction_error(const Vector& y_test, const Matrix& X_test, const Vector& beta_hat) {
  if (X_test.rows() != y_test.size() || X_test.cols() != beta_hat.size()) {
    throw InvalidInput("prediction_error: dimension mismatch");
  }
  if (y_test.size() == 0) throw InvalidInput("prediction_error: empty test set");
  return (y_test - X_test * beta_hat).squaredNorm() / static_cast<double>(y_test.size());
}

double l2_loss(const Vector& beta_true, const Vector& beta_hat) {
  if (beta_true.size() != beta_hat.size()) throw InvalidInput("l2_loss: length mismatch");
  return (beta_true - beta_hat).norm();
}

SelectionErrors selection_errors(const std::vector<bool>& selected, const Vector& beta_true) {
  if (static_cast<Index>(selected.size()) != beta_true.size()) {
    throw InvalidInput("selection_errors: length mismatch");
  }
  SelectionErrors e;
  for (Index j = 0; j < beta_true.size(); ++j) {
    const bool truly_active = beta_true[j] != 0.0;
    if (selected[j] && !truly_active) ++e.fp;
    if (!selected[j] && truly_active) ++e.fn;
  }
  return e;
}

double adjusted_rand_index(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw InvalidInput("adjusted_rand_index: length mismatch");
  if (a.size() < 2) throw InvalidInput("adjusted_rand_index needs at least two items");
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [key, count] : table) index += choose2(count);
  double sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : rows) sum_a += choose2(count);
  for (const auto& [key, count] : cols) sum_b += choose2(count);
  const double expected = sum_a * sum_b / choose2(static_cast<double>(a.size()));
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

}  // namespace brace
