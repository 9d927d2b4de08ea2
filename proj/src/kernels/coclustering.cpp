#include "brace/kernels.hpp"

namespace brace::kernels {

Matrix coclustering_serial(const IntMatrix& z) {
  const Index samples = z.rows();
  const Index p = z.cols();
  Matrix out = Matrix::Zero(p, p);
  for (Index s = 0; s < samples; ++s) {
    for (Index j = 0; j < p; ++j) {
      for (Index i = j + 1; i < p; ++i) {
        if (z(s, i) == z(s, j)) out(i, j) += 1.0;
      }
    }
  }
  for (Index j = 0; j < p; ++j) {
    out(j, j) = static_cast<double>(samples);
    for (Index i = j + 1; i < p; ++i) out(j, i) = out(i, j);
  }
  return samples > 0 ? Matrix(out / static_cast<double>(samples)) : out;
}

Matrix coclustering_parallel(const IntMatrix& z) {
  const Index samples = z.rows();
  const Index p = z.cols();
  Matrix out = Matrix::Zero(p, p);
  // Each column j is owned by one thread; sample order within a column is
  // the same as the serial loop, so sums agree exactly.
#pragma omp parallel for schedule(dynamic, 4)
  for (Index j = 0; j < p; ++j) {
    for (Index s = 0; s < samples; ++s) {
      const int zj = z(s, j);
      for (Index i = j + 1; i < p; ++i) {
        if (z(s, i) == zj) out(i, j) += 1.0;
      }
    }
  }
  for (Index j = 0; j < p; ++j) {
    out(j, j) = static_cast<double>(samples);
    for (Index i = j + 1; i < p; ++i) out(j, i) = out(i, j);
  }
  return samples > 0 ? Matrix(out / static_cast<double>(samples)) : out;
}

}  // namespace brace::kernels
