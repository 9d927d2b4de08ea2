#include "brace/random.hpp"

#include <cmath>
#include <limits>

namespace brace {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t x = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double draw_standard_normal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

Vector draw_standard_normal(Index size, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(size);
  for (Index i = 0; i < size; ++i) out[i] = normal(rng);
  return out;
}

double draw_uniform(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double draw_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw NumericalError("gamma draw with non-positive parameters: shape=" +
                         std::to_string(shape) + " rate=" + std::to_string(rate));
  }
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  double x = gamma(rng);
  // Tiny shapes (a ~ 1e-3) underflow to exactly zero in double precision.
  if (x <= 0.0) x = std::numeric_limits<double>::min();
  return x;
}

double draw_inverse_gamma(double shape, double scale, Rng& rng) {
  return 1.0 / draw_gamma(shape, scale, rng);
}

double draw_beta(double a, double b, Rng& rng) {
  const double x = draw_gamma(a, 1.0, rng);
  const double y = draw_gamma(b, 1.0, rng);
  return x / (x + y);
}

Index draw_categorical_log(const Vector& log_weights, Rng& rng) {
  const double top = log_weights.maxCoeff();
  if (!std::isfinite(top) || log_weights.hasNaN()) {
    throw NumericalError("categorical draw with no finite log-weight");
  }
  Vector w = (log_weights.array() - top).exp();
  const double u = draw_uniform(rng) * w.sum();
  double acc = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  for (Index i = w.size() - 1; i >= 0; --i) {
    if (w[i] > 0.0) return i;
  }
  return w.size() - 1;
}

}  // namespace brace
