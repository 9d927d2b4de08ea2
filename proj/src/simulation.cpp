#include "brace/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "brace/random.hpp"

namespace brace {
namespace {

struct TemplateBlock {
  double value;
  int count;
};

// Printed benchmark template; sums to 2.27 over 33 nonzero entries.
constexpr TemplateBlock kTemplate[] = {
    {-0.8, 4}, {-1.41, 6}, {-1.95, 4}, {-1.16, 1}, {0.96, 1},
    {0.0, 3},  {1.04, 6},  {0.51, 4},  {1.95, 7},
};

constexpr double kEigenFloor = 1e-6;

}  // namespace

const char* to_string(CovarianceCase c) { return c == CovarianceCase::kDep1 ? "dep1" : "dep2"; }

CovarianceCase parse_covariance_case(const std::string& s) {
  if (s == "dep1") return CovarianceCase::kDep1;
  if (s == "dep2") return CovarianceCase::kDep2;
  throw InvalidInput("unknown covariance case '" + s + "' (expected dep1 or dep2)");
}

void SimConfig::validate() const {
  if (p < kTemplateSlots) {
    throw InvalidInput("p must be at least " + std::to_string(kTemplateSlots) +
                       " (coefficient template size), got " + std::to_string(p));
  }
  if (n < 4) throw InvalidInput("n must be at least 4");
  if (!(snr > 0.0)) throw InvalidInput("snr must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidInput("train_fraction must lie in (0, 1)");
  }
  if (cov_case == CovarianceCase::kDep1 && !(std::abs(rho) < 1.0)) {
    throw InvalidInput("rho must lie in (-1, 1)");
  }
}

TrueCoefficients build_true_beta(Index p) {
  if (p < kTemplateSlots) {
    throw InvalidInput("p must be at least " + std::to_string(kTemplateSlots));
  }
  TrueCoefficients out;
  out.beta = Vector::Zero(p);
  out.partition.assign(static_cast<std::size_t>(p), 0);
  Index pos = 0;
  int label = 0;
  double sum = 0.0;
  int nonzero = 0;
  for (const TemplateBlock& block : kTemplate) {
    if (block.value != 0.0) ++label;
    for (int r = 0; r < block.count; ++r, ++pos) {
      out.beta[pos] = block.value;
      if (block.value != 0.0) {
        out.partition[pos] = label;
        sum += block.value;
        ++nonzero;
      }
    }
  }
  const double shift = sum / nonzero;
  for (Index j = 0; j < p; ++j) {
    if (out.partition[j] != 0) out.beta[j] -= shift;
  }
  return out;
}

Matrix build_covariance(const SimConfig& cfg, const Labels& partition) {
  const Index p = cfg.p;
  if (static_cast<Index>(partition.size()) != p) {
    throw InvalidInput("partition length differs from p");
  }
  Matrix sigma = Matrix::Identity(p, p);
  if (cfg.cov_case == CovarianceCase::kDep1) {
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < p; ++j) {
        sigma(i, j) = std::pow(cfg.rho, static_cast<double>(std::abs(i - j)));
      }
    }
    return sigma;
  }
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) {
      if (i == j || partition[i] == 0 || partition[j] == 0) continue;
      const double d = static_cast<double>(std::abs(i - j));
      const double v = partition[i] == partition[j] ? 0.75 - 0.015 * d : 0.4 - 0.02 * d;
      sigma(i, j) = std::max(v, 0.0);
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  if (eig.eigenvalues().minCoeff() < kEigenFloor) {
    const Vector floored = eig.eigenvalues().cwiseMax(kEigenFloor);
    sigma = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
    sigma = 0.5 * (sigma + sigma.transpose());
  }
  return sigma;
}

SimulatedData simulate_dataset(const SimConfig& cfg) {
  cfg.validate();
  const Index n = cfg.n;
  const Index p = cfg.p;
  Rng rng(cfg.seed);

  SimulatedData out;
  const TrueCoefficients truth = build_true_beta(p);
  out.truth.beta_true = truth.beta;
  out.truth.partition_true = truth.partition;
  out.truth.cov_case = cfg.cov_case;
  out.truth.rho = cfg.rho;

  const Matrix sigma = build_covariance(cfg, truth.partition);
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("simulation covariance is not positive definite");
  const Matrix L = llt.matrixL();

  Vector mu = Vector::Zero(p);
  for (Index j = 0; j < std::min<Index>(10, p); ++j) mu[j] = std::log(0.5 * static_cast<double>(p));

  Matrix log_comp(n, p);
  for (Index i = 0; i < n; ++i) {
    const Vector u = mu + L * draw_standard_normal(p, rng);
    const double top = u.maxCoeff();
    const double lse = top + std::log((u.array() - top).exp().sum());
    log_comp.row(i) = (u.array() - lse).matrix().transpose();
  }
  out.composition = log_comp.array().exp().matrix();
  for (Index i = 0; i < n; ++i) out.composition.row(i) /= out.composition.row(i).sum();

  double abs_sum = 0.0;
  int nonzero = 0;
  for (Index j = 0; j < p; ++j) {
    if (truth.beta[j] != 0.0) {
      abs_sum += std::abs(truth.beta[j]);
      ++nonzero;
    }
  }
  out.truth.sigma_true = (abs_sum / nonzero) / cfg.snr;
  out.response = log_comp * truth.beta + out.truth.sigma_true * draw_standard_normal(n, rng);

  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::shuffle(rows.begin(), rows.end(), rng);
  const auto n_train = static_cast<Index>(std::llround(cfg.train_fraction * static_cast<double>(n)));
  out.train_rows.assign(rows.begin(), rows.begin() + n_train);
  out.test_rows.assign(rows.begin() + n_train, rows.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());

  for (Index j = 0; j < p; ++j) out.feature_names.push_back("f" + std::to_string(j + 1));
  for (Index i = 0; i < n; ++i) out.sample_ids.push_back("s" + std::to_string(i + 1));

  auto take = [&](const std::vector<Index>& idx, Matrix& X, Vector& y) {
    X.resize(static_cast<Index>(idx.size()), p);
    y.resize(static_cast<Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
      X.row(static_cast<Index>(r)) = log_comp.row(idx[r]);
      y[static_cast<Index>(r)] = out.response[idx[r]];
    }
  };
  Matrix X_train, X_test;
  Vector y_train, y_test;
  take(out.train_rows, X_train, y_train);
  take(out.test_rows, X_test, y_test);
  out.train = center(X_train, y_train);
  out.train.feature_names = out.feature_names;
  out.test = center_like(out.train, X_test, y_test);
  return out;
}

}  // namespace brace
