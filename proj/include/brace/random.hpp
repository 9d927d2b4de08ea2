#pragma once

#include <cstdint>

#include "brace/common.hpp"

namespace brace {

/// SplitMix64 finalizer applied to (base, stream). Used to expand a single
/// user seed into independent per-replicate and per-phase streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

double draw_standard_normal(Rng& rng);
Vector draw_standard_normal(Index size, Rng& rng);
double draw_uniform(Rng& rng);

/// Gamma with shape/rate parameterization (mean shape / rate).
double draw_gamma(double shape, double rate, Rng& rng);

/// Inverse gamma IG(shape, scale): density proportional to
/// x^{-shape-1} exp(-scale / x).
double draw_inverse_gamma(double shape, double scale, Rng& rng);

double draw_beta(double a, double b, Rng& rng);

/// Index drawn with probability proportional to exp(log_weights[i]).
/// Throws NumericalError if every weight is -inf or any is NaN.
Index draw_categorical_log(const Vector& log_weights, Rng& rng);

}  // namespace brace
