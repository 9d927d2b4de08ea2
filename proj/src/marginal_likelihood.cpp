#include "brace/marginal_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace brace {
namespace {

std::string describe_state(std::span<const int> sizes, const MarginalScalars& s) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"sigma2\":" << s.sigma2 << ",\"gamma2\":" << s.gamma2 << ",\"n\":" << s.n
     << ",\"yty\":" << s.yty << ",\"f\":[";
  for (std::size_t k = 0; k < sizes.size(); ++k) os << (k ? "," : "") << sizes[k];
  os << "]}";
  return os.str();
}

}  // namespace

Labels compact_labels(std::span<const int> z) {
  std::vector<int> present;
  for (int label : z) {
    if (label < 0) throw InvalidInput("negative cluster label " + std::to_string(label));
    if (label > 0) present.push_back(label);
  }
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  Labels out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] == 0) {
      out[j] = 0;
    } else {
      out[j] = 1 + static_cast<int>(std::lower_bound(present.begin(), present.end(), z[j]) -
                                    present.begin());
    }
  }
  return out;
}

ClusterFrequencies cluster_frequencies(std::span<const int> z) {
  const Labels compact = compact_labels(z);
  ClusterFrequencies freq;
  for (int label : compact) {
    if (label == 0) {
      ++freq.p0;
      continue;
    }
    if (static_cast<std::size_t>(label) > freq.f.size()) freq.f.resize(label, 0);
    ++freq.f[label - 1];
  }
  for (int size : freq.f) {
    if (size <= 0) throw std::logic_error("empty nonzero cluster after compaction");
    freq.p_z += size;
  }
  return freq;
}

double log_det_B(std::span<const int> f) {
  if (f.size() <= 1) return 0.0;
  double sum_sq = 0.0;
  for (int fk : f) sum_sq += static_cast<double>(fk) * fk;
  return std::log(sum_sq) - 2.0 * std::log(static_cast<double>(f.back()));
}

ReducedQuadratic reduce_quadratic(const Matrix& A, const Vector& b, std::span<const int> f) {
  const Index K = static_cast<Index>(f.size());
  if (A.rows() != K || A.cols() != K || b.size() != K) {
    throw InvalidInput("reduce_quadratic: dimensions disagree with cluster count");
  }
  ReducedQuadratic out;
  if (K <= 1) {
    out.A_star.resize(0, 0);
    out.b_tilde.resize(0);
    return out;
  }
  const Index m = K - 1;
  Vector f_star(m);
  for (Index k = 0; k < m; ++k) f_star[k] = f[k];
  const double f_last = f[m];
  const Matrix A11 = A.topLeftCorner(m, m);
  const Vector A12 = A.col(m).head(m);
  const double a_kk = A(m, m);
  out.A_star = A11 - (A12 * f_star.transpose() + f_star * A12.transpose()) / f_last +
               (a_kk / (f_last * f_last)) * f_star * f_star.transpose();
  out.b_tilde = b.head(m) - (b[m] / f_last) * f_star;
  return out;
}

ClusterAggregates aggregates_from_design(const Matrix& X, const Vector& y,
                                         std::span<const int> z) {
  if (static_cast<Index>(z.size()) != X.cols()) {
    throw InvalidInput("label vector length differs from the number of features");
  }
  if (X.rows() != y.size()) throw InvalidInput("design/response row mismatch");
  const ClusterFrequencies freq = cluster_frequencies(z);
  const Labels compact = compact_labels(z);
  Matrix xz = Matrix::Zero(X.rows(), freq.K());
  for (std::size_t j = 0; j < compact.size(); ++j) {
    if (compact[j] > 0) xz.col(compact[j] - 1) += X.col(static_cast<Index>(j));
  }
  ClusterAggregates agg;
  agg.gram = xz.transpose() * xz;
  agg.xty = xz.transpose() * y;
  agg.sizes = freq.f;
  return agg;
}

double log_null_marginal(const MarginalScalars& s) {
  return -0.5 * static_cast<double>(s.n) * std::log(2.0 * std::numbers::pi * s.sigma2) -
         s.yty / (2.0 * s.sigma2);
}

double log_marginal_kernel(const double* gram, Index ld, const double* xty, const int* sizes,
                           Index K, const MarginalScalars& s, double* work) {
  const double null_part = log_null_marginal(s);
  if (K <= 1) return null_part;

  const Index m = K - 1;
  const double ratio = s.sigma2 / s.gamma2;
  const double f_last = sizes[m];
  const double a_kk = gram[m + m * ld] + ratio;
  const double b_last = xty[m];
  double* a = work;      // m x m, column-major, lower triangle used
  double* b = work + m * m;

  double sum_sq = f_last * f_last;
  for (Index i = 0; i < m; ++i) {
    const double fi = sizes[i];
    sum_sq += fi * fi;
    const double a_ik = gram[i + m * ld];
    b[i] = xty[i] - b_last * fi / f_last;
    for (Index j = i; j < m; ++j) {
      const double fj = sizes[j];
      const double a_jk = gram[j + m * ld];
      double v = gram[j + i * ld] - (a_ik * fj + fi * a_jk) / f_last +
                 a_kk * fi * fj / (f_last * f_last);
      if (i == j) v += ratio;
      a[j + i * m] = v;
    }
  }

  // In-place lower Cholesky of A*.
  double log_det = 0.0;
  for (Index j = 0; j < m; ++j) {
    double d = a[j + j * m];
    for (Index k = 0; k < j; ++k) d -= a[j + k * m] * a[j + k * m];
    if (!(d > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double l_jj = std::sqrt(d);
    a[j + j * m] = l_jj;
    log_det += 2.0 * std::log(l_jj);
    for (Index i = j + 1; i < m; ++i) {
      double v = a[i + j * m];
      for (Index k = 0; k < j; ++k) v -= a[i + k * m] * a[j + k * m];
      a[i + j * m] = v / l_jj;
    }
  }
  // Forward solve L w = b~; quad = w^T w = b~^T A*^{-1} b~.
  double quad = 0.0;
  for (Index i = 0; i < m; ++i) {
    double v = b[i];
    for (Index k = 0; k < i; ++k) v -= a[i + k * m] * b[k];
    b[i] = v / a[i + i * m];
    quad += b[i] * b[i];
  }

  return null_part + 0.5 * static_cast<double>(m) * std::log(ratio) - 0.5 * log_det +
         0.5 * std::log(sum_sq) - std::log(f_last) + quad / (2.0 * s.sigma2);
}

double log_marginal_from_aggregates(const ClusterAggregates& agg, const MarginalScalars& s) {
  const Index K = agg.K();
  if (agg.gram.rows() != K || agg.gram.cols() != K || agg.xty.size() != K) {
    throw InvalidInput("cluster aggregates have inconsistent dimensions");
  }
  std::vector<double> work(static_cast<std::size_t>(K * K + K) + 1);
  const double value =
      log_marginal_kernel(agg.gram.data(), agg.gram.outerStride(), agg.xty.data(),
                          agg.sizes.data(), K, s, work.data());
  if (!std::isfinite(value)) {
    throw NumericalError("collapsed marginal is not finite", describe_state(agg.sizes, s));
  }
  return value;
}

double log_marginal_y(const Vector& y, const Matrix& X, std::span<const int> z, double sigma2,
                      double gamma2) {
  if (!(sigma2 > 0.0) || !(gamma2 > 0.0)) {
    throw InvalidInput("variances must be positive");
  }
  const ClusterAggregates agg = aggregates_from_design(X, y, z);
  MarginalScalars s{y.squaredNorm(), y.size(), sigma2, gamma2};
  const Index K = agg.K();
  if (K <= 1) return log_null_marginal(s);

  const double ratio = sigma2 / gamma2;
  const Matrix A = agg.gram + ratio * Matrix::Identity(K, K);
  const ReducedQuadratic red = reduce_quadratic(A, agg.xty, agg.sizes);
  Eigen::LLT<Matrix> llt(red.A_star);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("reduced quadratic A* is not positive definite",
                         describe_state(agg.sizes, s));
  }
  const Matrix L = llt.matrixL();
  const double log_det_a = 2.0 * L.diagonal().array().log().sum();
  const double quad = red.b_tilde.dot(llt.solve(red.b_tilde));
  const double value = log_null_marginal(s) + 0.5 * static_cast<double>(K - 1) * std::log(ratio) -
                       0.5 * log_det_a + 0.5 * log_det_B(agg.sizes) + quad / (2.0 * sigma2);
  if (!std::isfinite(value)) {
    throw NumericalError("collapsed marginal is not finite", describe_state(agg.sizes, s));
  }
  return value;
}

}  // namespace brace
