#include "brace/constrained_gaussian.hpp"

#include <cmath>

#include "brace/random.hpp"

namespace brace {
namespace {

constexpr double kEigenFloor = 1e-12;

Matrix lower_cholesky(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string("Cholesky factorization failed for ") + what);
  }
  return llt.matrixL();
}

}  // namespace

void GaussianParams::validate() const {
  if (cov.rows() != cov.cols() || cov.rows() != mean.size()) {
    throw InvalidInput("Gaussian mean/covariance dimensions disagree");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + cov.cwiseAbs().maxCoeff())) {
    throw InvalidInput("Gaussian covariance is not symmetric");
  }
}

HyperplaneConstraint HyperplaneConstraint::weighted_sum(const Vector& weights, double value) {
  HyperplaneConstraint c;
  c.H = weights.transpose();
  c.q = Vector::Constant(1, value);
  return c;
}

void HyperplaneConstraint::validate(Index dim) const {
  if (H.cols() != dim) throw InvalidInput("constraint matrix has wrong column count");
  if (H.rows() != q.size()) throw InvalidInput("constraint matrix/value row mismatch");
  if (H.rows() >= dim) throw InvalidInput("constraint must have fewer rows than dimensions");
}

GaussianParams conditional_moments(const GaussianParams& params,
                                   const HyperplaneConstraint& constraint) {
  params.validate();
  constraint.validate(params.mean.size());
  const Matrix cov_h = params.cov * constraint.H.transpose();  // K x m
  const Matrix hsh = constraint.H * cov_h;                    // m x m
  Eigen::LDLT<Matrix> ldlt(hsh);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw NumericalError("constraint H Sigma H^T is singular (H rows=" +
                         std::to_string(constraint.H.rows()) + ")");
  }
  GaussianParams out;
  out.mean = params.mean + cov_h * ldlt.solve(constraint.q - constraint.H * params.mean);
  Matrix sigma_t = params.cov - cov_h * ldlt.solve(cov_h.transpose());
  sigma_t = 0.5 * (sigma_t + sigma_t.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_t);
  Vector values = eig.eigenvalues();
  bool clipped = false;
  for (Index i = 0; i < values.size(); ++i) {
    if (values[i] < kEigenFloor) {
      values[i] = 0.0;
      clipped = true;
    }
  }
  if (clipped) {
    sigma_t = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
    sigma_t = 0.5 * (sigma_t + sigma_t.transpose());
  }
  out.cov = std::move(sigma_t);
  return out;
}

HyperplaneGaussian::HyperplaneGaussian(const GaussianParams& params,
                                       const HyperplaneConstraint& constraint) {
  params.validate();
  constraint.validate(params.mean.size());
  mean_ = params.mean;
  constraint_ = constraint;
  factor_ = lower_cholesky(params.cov, "Gaussian covariance");
  build_projection(params.cov * constraint.H.transpose());
}

HyperplaneGaussian HyperplaneGaussian::from_precision(const Matrix& precision,
                                                      const Vector& linear,
                                                      const HyperplaneConstraint& constraint) {
  if (precision.rows() != precision.cols() || precision.rows() != linear.size()) {
    throw InvalidInput("precision/linear term dimensions disagree");
  }
  constraint.validate(linear.size());
  HyperplaneGaussian g;
  g.precision_form_ = true;
  g.constraint_ = constraint;
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Cholesky factorization failed for Gaussian precision");
  }
  g.factor_ = llt.matrixL();
  g.mean_ = llt.solve(linear);
  g.build_projection(llt.solve(constraint.H.transpose()));
  return g;
}

void HyperplaneGaussian::build_projection(const Matrix& cov_h) {
  const Matrix hsh = constraint_.H * cov_h;
  if (hsh.rows() == 1) {
    const double s = hsh(0, 0);
    if (!(std::abs(s) > 0.0) || !std::isfinite(s)) {
      throw NumericalError("constraint H Sigma H^T is singular");
    }
    gain_ = cov_h / s;
    return;
  }
  Eigen::LDLT<Matrix> ldlt(hsh);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw NumericalError("constraint H Sigma H^T is singular");
  }
  gain_ = ldlt.solve(cov_h.transpose()).transpose();
}

Vector HyperplaneGaussian::draw(Rng& rng) const {
  const Vector eps = draw_standard_normal(mean_.size(), rng);
  Vector theta;
  if (precision_form_) {
    theta = mean_ + factor_.transpose().triangularView<Eigen::Upper>().solve(eps);
  } else {
    theta = mean_ + factor_.triangularView<Eigen::Lower>() * eps;
  }
  theta += gain_ * (constraint_.q - constraint_.H * theta);
  return theta;
}

Vector HyperplaneGaussian::constrained_mean() const {
  return mean_ + gain_ * (constraint_.q - constraint_.H * mean_);
}

Vector sample_hyperplane_gaussian(const GaussianParams& params,
                                  const HyperplaneConstraint& constraint, Rng& rng) {
  return HyperplaneGaussian(params, constraint).draw(rng);
}

}  // namespace brace
