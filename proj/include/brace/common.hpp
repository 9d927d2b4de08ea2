#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace brace {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Cluster labels, one per feature. Label 0 is the spike (coefficient exactly
/// zero); nonzero clusters are numbered 1..K.
using Labels = std::vector<int>;

using Rng = std::mt19937_64;

inline constexpr const char* kVersion = "1.0.0";

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a factorization fails or a density evaluates to a non-finite
/// value. `state_dump` carries a JSON snapshot of the offending state when
/// one is available.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, std::string state_dump = {})
      : std::runtime_error(what), state_dump_(std::move(state_dump)) {}

  const std::string& state_dump() const noexcept { return state_dump_; }

 private:
  std::string state_dump_;
};

}  // namespace brace
