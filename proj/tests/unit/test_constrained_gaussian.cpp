#include <doctest.h>

#include "brace/constrained_gaussian.hpp"
#include "brace/random.hpp"

using namespace brace;

namespace {

Matrix random_spd(Index k, Rng& rng) {
  Matrix A(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) A(i, j) = draw_standard_normal(rng);
  return A * A.transpose() + 0.5 * Matrix::Identity(k, k);
}

}  // namespace

TEST_CASE("conditional moments of the sum-to-zero standard normal") {
  GaussianParams g{Vector::Zero(3), Matrix::Identity(3, 3)};
  const auto c = HyperplaneConstraint::weighted_sum(Vector::Ones(3));
  const GaussianParams t = conditional_moments(g, c);
  CHECK(t.mean.cwiseAbs().maxCoeff() < 1e-15);
  const Matrix expected = Matrix::Identity(3, 3) - Matrix::Constant(3, 3, 1.0 / 3.0);
  CHECK((t.cov - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("conditional mean for H = (1, 2)") {
  GaussianParams g{Vector::Ones(2), Matrix::Identity(2, 2)};
  Vector h(2);
  h << 1, 2;
  const GaussianParams t = conditional_moments(g, HyperplaneConstraint::weighted_sum(h));
  CHECK(t.mean[0] == doctest::Approx(0.4));
  CHECK(t.mean[1] == doctest::Approx(-0.2));
  CHECK((h.transpose() * t.cov).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("a mean already on the hyperplane is unchanged, and conditioning is idempotent") {
  Rng rng(3);
  GaussianParams g{Vector::Random(4), random_spd(4, rng)};
  Vector f(4);
  f << 3, 2, 1, 4;
  const auto c = HyperplaneConstraint::weighted_sum(f, f.dot(g.mean));
  CHECK((conditional_moments(g, c).mean - g.mean).cwiseAbs().maxCoeff() < 1e-12);
  const auto c0 = HyperplaneConstraint::weighted_sum(f);
  const GaussianParams once = conditional_moments(g, c0);
  const GaussianParams twice = conditional_moments(once, c0);
  CHECK((twice.cov - once.cov).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((twice.mean - once.mean).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("draws satisfy 3 t1 + 2 t2 + t3 = 0") {
  Rng rng(11);
  GaussianParams g{Vector::Random(3) * 5, random_spd(3, rng)};
  Vector f(3);
  f << 3, 2, 1;
  const auto c = HyperplaneConstraint::weighted_sum(f);
  for (int i = 0; i < 1000; ++i) {
    const Vector t = sample_hyperplane_gaussian(g, c, rng);
    CHECK(std::abs(f.dot(t)) <= 1e-10);
  }
}

TEST_CASE("identity covariance projection subtracts the mean") {
  GaussianParams g{Vector::Zero(4), Matrix::Identity(4, 4)};
  const auto c = HyperplaneConstraint::weighted_sum(Vector::Ones(4));
  Rng a(5), b(5);
  const Vector t = sample_hyperplane_gaussian(g, c, a);
  const Vector raw = draw_standard_normal(4, b);
  CHECK((t - (raw.array() - raw.mean()).matrix()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("precision form agrees with covariance form in moments") {
  Rng rng(17);
  const Matrix Q = random_spd(4, rng);
  const Vector lin = Vector::Random(4);
  Vector f(4);
  f << 1, 2, 2, 3;
  const auto c = HyperplaneConstraint::weighted_sum(f);
  const auto pg = HyperplaneGaussian::from_precision(Q, lin, c);
  const Matrix cov = Q.inverse();
  const GaussianParams t = conditional_moments({cov * lin, cov}, c);
  CHECK((pg.constrained_mean() - t.mean).cwiseAbs().maxCoeff() < 1e-10);
  const int N = 40000;
  Vector sum = Vector::Zero(4);
  for (int i = 0; i < N; ++i) {
    const Vector d = pg.draw(rng);
    CHECK(std::abs(f.dot(d)) < 1e-10);
    sum += d;
  }
  sum /= N;
  for (Index i = 0; i < 4; ++i) {
    CHECK(std::abs(sum[i] - t.mean[i]) < 4.0 * std::sqrt(std::max(t.cov(i, i), 0.0) / N) + 1e-12);
  }
}

TEST_CASE("same seed, same draws") {
  GaussianParams g{Vector::Zero(3), Matrix::Identity(3, 3)};
  const auto c = HyperplaneConstraint::weighted_sum(Vector::Ones(3));
  Rng a(1), b(1);
  CHECK(sample_hyperplane_gaussian(g, c, a) == sample_hyperplane_gaussian(g, c, b));
}

TEST_CASE("invalid inputs") {
  GaussianParams g{Vector::Zero(2), Matrix::Identity(2, 2)};
  Rng rng(1);
  CHECK_THROWS_AS(sample_hyperplane_gaussian(g, HyperplaneConstraint::weighted_sum(Vector::Ones(3)), rng),
                  InvalidInput);
  GaussianParams bad{Vector::Zero(2), Matrix::Zero(2, 2)};
  CHECK_THROWS_AS(sample_hyperplane_gaussian(bad, HyperplaneConstraint::weighted_sum(Vector::Ones(2)), rng),
                  NumericalError);
  CHECK_THROWS_AS(conditional_moments(bad, HyperplaneConstraint::weighted_sum(Vector::Ones(2))),
                  NumericalError);
}
