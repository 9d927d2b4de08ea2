#include <doctest.h>

#include <omp.h>

#include "brace/kernels.hpp"
#include "brace/marginal_likelihood.hpp"
#include "brace/random.hpp"

using namespace brace;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = draw_standard_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("parallel Gram equals the serial reference bitwise") {
  Rng rng(1);
  const Matrix X = random_matrix(57, 33, rng);
  const Matrix a = kernels::gram_serial(X);
  const Matrix b = kernels::gram_parallel(X);
  CHECK(a == b);
  CHECK((a - X.transpose() * X).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("candidate scores: serial, parallel and direct evaluation agree") {
  Rng rng(2);
  const Index n = 30, p = 40;
  const Matrix X = random_matrix(n, p, rng);
  const Vector y = random_matrix(n, 1, rng);
  Labels z(p);
  for (Index j = 0; j < p; ++j) z[j] = static_cast<int>(j % 9);
  const Index feature = 5;
  Labels without = z;
  without[feature] = 0;
  const ClusterAggregates base = aggregates_from_design(X, y, without);
  const Index K = base.K();
  std::vector<double> cross(static_cast<std::size_t>(K), 0.0);
  for (Index j = 0; j < p; ++j) {
    if (without[j] > 0) cross[without[j] - 1] += X.col(j).dot(X.col(feature));
  }
  kernels::CandidateInputs in;
  in.base = &base;
  in.cross = cross;
  in.self_gram = X.col(feature).squaredNorm();
  in.self_xty = X.col(feature).dot(y);
  in.scalars = {y.squaredNorm(), n, 0.9, 1.4};
  std::vector<double> serial(static_cast<std::size_t>(K + 2)), parallel(serial.size());
  kernels::score_candidates_serial(in, serial);
  kernels::score_candidates_parallel(in, parallel);
  CHECK(serial == parallel);
  for (Index c = 0; c <= K + 1; ++c) {
    Labels w = without;
    w[feature] = static_cast<int>(c);
    const double direct = log_marginal_y(y, X, w, 0.9, 1.4);
    CHECK(serial[static_cast<std::size_t>(c)] == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("co-clustering kernels agree and count the spike as a cluster") {
  IntMatrix z(3, 4);
  z << 0, 0, 1, 2,  //
      1, 1, 1, 0,   //
      0, 2, 1, 1;
  const Matrix a = kernels::coclustering_serial(z);
  const Matrix b = kernels::coclustering_parallel(z);
  CHECK(a == b);
  CHECK(a(0, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(a(2, 3) == doctest::Approx(1.0 / 3.0));
  for (Index i = 0; i < 4; ++i) CHECK(a(i, i) == 1.0);
  CHECK(a == a.transpose());
  Rng rng(4);
  IntMatrix big(50, 70);
  for (Index s = 0; s < 50; ++s)
    for (Index j = 0; j < 70; ++j) big(s, j) = static_cast<int>(rng() % 6);
  omp_set_num_threads(3);
  CHECK(kernels::coclustering_serial(big) == kernels::coclustering_parallel(big));
}
