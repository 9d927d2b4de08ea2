#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/oracles.hpp"
#include "brace/marginal_likelihood.hpp"
#include "brace/random.hpp"

using namespace brace;

namespace {

double direct_det_B(const std::vector<int>& f) {
  const Index k = static_cast<Index>(f.size()) - 1;
  if (k == 0) return 1.0;
  Vector fs(k);
  for (Index i = 0; i < k; ++i) fs[i] = f[static_cast<std::size_t>(i)];
  const double fK = f.back();
  return (Matrix::Identity(k, k) + fs * fs.transpose() / (fK * fK)).determinant();
}

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = draw_standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("cluster frequencies") {
  const Labels z{1, 1, 1, 2, 2, 3};
  const auto f = cluster_frequencies(z);
  CHECK(f.f == std::vector<int>{3, 2, 1});
  CHECK(f.p0 == 0);
  CHECK(f.p_z == 6);
  const auto e = cluster_frequencies(Labels{0, 0, 0});
  CHECK(e.f.empty());
  CHECK(e.p0 == 3);
  const auto g = cluster_frequencies(Labels{0, 2, 1, 2});
  CHECK(g.f == std::vector<int>{1, 2});
  CHECK(g.p0 == 1);
  CHECK(compact_labels(Labels{0, 5, 5, 2}) == Labels{0, 2, 2, 1});
  CHECK_THROWS_AS(compact_labels(Labels{0, -1}), InvalidInput);
}

TEST_CASE("determinant identity examples") {
  CHECK(std::exp(log_det_B(std::vector<int>{3, 2, 1})) == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(std::exp(log_det_B(std::vector<int>{1})) == doctest::Approx(1.0));
  CHECK(std::exp(log_det_B(std::vector<int>{2, 2})) == doctest::Approx(2.0).epsilon(1e-12));
  for (const auto& f : {std::vector<int>{4, 1, 7, 2}, std::vector<int>{1, 9}, std::vector<int>{5, 5, 5}}) {
    CHECK(std::exp(log_det_B(f)) == doctest::Approx(direct_det_B(f)).epsilon(1e-10));
  }
}

TEST_CASE("null model for K = 0 and K = 1") {
  Rng rng(2);
  const Matrix X = random_matrix(5, 3, rng);
  const Vector y = random_matrix(5, 1, rng);
  const double s2 = 0.7;
  const double null = -2.5 * std::log(2 * M_PI * s2) - y.squaredNorm() / (2 * s2);
  CHECK(log_marginal_y(y, X, Labels{0, 0, 0}, s2, 3.0) == doctest::Approx(null).epsilon(1e-14));
  CHECK(log_marginal_y(y, X, Labels{1, 0, 1}, s2, 3.0) == doctest::Approx(null).epsilon(1e-14));
}

TEST_CASE("closed form matches quadrature for n = 3, p = 4, z = (1,1,2,2)") {
  Rng rng(42);
  const Matrix X = random_matrix(3, 4, rng);
  const Vector y = random_matrix(3, 1, rng);
  const Labels z{1, 1, 2, 2};
  const double exact = log_marginal_y(y, X, z, 1.0, 1.0);
  const double quad = oracle::quadrature_log_marginal(y, X, z, 1.0, 1.0);
  CHECK(std::abs(std::expm1(exact - quad)) < 1e-6);
}

TEST_CASE("closed form matches quadrature on random small instances") {
  Rng rng(7);
  const double vars[] = {0.5, 1.0, 2.0};
  for (int rep = 0; rep < 12; ++rep) {
    const Index n = 2 + static_cast<Index>(rng() % 4);
    const Index p = 3 + static_cast<Index>(rng() % 4);
    const int K = 2 + static_cast<int>(rng() % 2);
    Labels z(static_cast<std::size_t>(p), 0);
    for (int k = 0; k < K; ++k) z[static_cast<std::size_t>(k)] = k + 1;
    for (Index j = K; j < p; ++j) z[static_cast<std::size_t>(j)] = static_cast<int>(rng() % (K + 1));
    std::shuffle(z.begin(), z.end(), rng);
    const Matrix X = random_matrix(n, p, rng);
    const Vector y = random_matrix(n, 1, rng);
    const double s2 = vars[rng() % 3];
    const double g2 = vars[rng() % 3];
    const Labels zc = compact_labels(z);
    const double exact = log_marginal_y(y, X, zc, s2, g2);
    const double quad = oracle::quadrature_log_marginal(y, X, zc, s2, g2);
    CHECK(std::abs(std::expm1(exact - quad)) < 1e-6);
  }
}

TEST_CASE("relabeling clusters leaves the marginal unchanged") {
  Rng rng(9);
  const Matrix X = random_matrix(8, 7, rng);
  const Vector y = random_matrix(8, 1, rng);
  const Labels z{1, 2, 3, 1, 0, 3, 2};
  const double base = log_marginal_y(y, X, z, 0.8, 1.7);
  std::vector<int> perm{1, 2, 3};
  while (std::next_permutation(perm.begin(), perm.end())) {
    Labels w = z;
    for (int& l : w) {
      if (l > 0) l = perm[static_cast<std::size_t>(l - 1)];
    }
    CHECK(log_marginal_y(y, X, w, 0.8, 1.7) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("duplicating a feature into the same cluster changes nothing once X_z is fixed") {
  Rng rng(13);
  Matrix X = random_matrix(6, 4, rng);
  const Vector y = random_matrix(6, 1, rng);
  const Labels z{1, 1, 2, 2};
  const double base = log_marginal_y(y, X, z, 1.0, 1.0);
  // Split column 0 into two halves in the same cluster: X_z unchanged, sizes grow.
  Matrix Xs(6, 5);
  Xs << 0.5 * X.col(0), 0.5 * X.col(0), X.col(1), X.col(2), X.col(3);
  const auto agg1 = aggregates_from_design(X, y, z);
  const auto agg2 = aggregates_from_design(Xs, y, Labels{1, 1, 1, 2, 2});
  CHECK((agg1.gram - agg2.gram).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((agg1.xty - agg2.xty).cwiseAbs().maxCoeff() < 1e-12);
  const MarginalScalars s{y.squaredNorm(), 6, 1.0, 1.0};
  CHECK(log_marginal_from_aggregates(agg1, s) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("reduced quadratic log-determinant matches an explicit determinant") {
  Rng rng(21);
  for (int K = 2; K <= 4; ++K) {
    const Matrix Xz = random_matrix(9, K, rng);
    Matrix A = Xz.transpose() * Xz + 0.6 * Matrix::Identity(K, K);
    const Vector b = Vector::Random(K);
    std::vector<int> f(static_cast<std::size_t>(K));
    for (int& v : f) v = 1 + static_cast<int>(rng() % 4);
    const ReducedQuadratic r = reduce_quadratic(A, b, f);
    const Eigen::LLT<Matrix> llt(r.A_star);
    REQUIRE(llt.info() == Eigen::Success);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    CHECK(logdet == doctest::Approx(std::log(r.A_star.determinant())).epsilon(1e-9));
    // A* = M^T A M with theta = M theta*.
    Matrix M = Matrix::Zero(K, K - 1);
    M.topRows(K - 1).setIdentity();
    for (int k = 0; k < K - 1; ++k) M(K - 1, k) = -double(f[k]) / f.back();
    CHECK((M.transpose() * A * M - r.A_star).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((M.transpose() * b - r.b_tilde).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("raw kernel agrees with the aggregate route and flags indefinite input") {
  Rng rng(5);
  const Matrix X = random_matrix(10, 6, rng);
  const Vector y = random_matrix(10, 1, rng);
  const Labels z{1, 2, 0, 3, 2, 1};
  const auto agg = aggregates_from_design(X, y, z);
  const MarginalScalars s{y.squaredNorm(), 10, 1.3, 0.4};
  std::vector<double> work(64);
  const double k = log_marginal_kernel(agg.gram.data(), agg.gram.rows(), agg.xty.data(),
                                       agg.sizes.data(), agg.K(), s, work.data());
  CHECK(k == doctest::Approx(log_marginal_y(y, X, z, 1.3, 0.4)).epsilon(1e-12));
  Matrix bad = -Matrix::Identity(3, 3) * 100.0;
  CHECK(std::isnan(log_marginal_kernel(bad.data(), 3, agg.xty.data(), agg.sizes.data(), 3, s,
                                       work.data())));
  ClusterAggregates broken{bad, agg.xty, agg.sizes};
  CHECK_THROWS_AS(log_marginal_from_aggregates(broken, s), NumericalError);
  CHECK_THROWS_AS(log_marginal_y(y, X, z, -1.0, 1.0), InvalidInput);
}
