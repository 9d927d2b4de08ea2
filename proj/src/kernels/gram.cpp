#include "brace/kernels.hpp"

namespace brace::kernels {

Matrix gram_serial(const Matrix& X) {
  const Index p = X.cols();
  Matrix g(p, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = j; i < p; ++i) {
      double acc = 0.0;
      for (Index r = 0; r < X.rows(); ++r) acc += X(r, i) * X(r, j);
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return g;
}

Matrix gram_parallel(const Matrix& X) {
  const Index p = X.cols();
  Matrix g(p, p);
#pragma omp parallel for schedule(dynamic, 8)
  for (Index j = 0; j < p; ++j) {
    for (Index i = j; i < p; ++i) {
      double acc = 0.0;
      for (Index r = 0; r < X.rows(); ++r) acc += X(r, i) * X(r, j);
      g(i, j) = acc;
      g(j, i) = acc;
    }
  }
  return g;
}

}  // namespace brace::kernels
