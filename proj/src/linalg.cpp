#include "specquant/linalg.hpp"

#include "specquant/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace specquant {

LeastSquaresSolution least_squares(const Matrix& design, const Matrix& rhs, double max_condition) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (rhs.rows() != n) {
    throw Error(ErrorCode::kDimension, "least_squares: design has " + std::to_string(n) +
                                           " rows but rhs has " + std::to_string(rhs.rows()));
  }
  if (n < p) {
    throw Error(ErrorCode::kUnderdetermined,
                "least_squares: " + std::to_string(n) + " equations for " + std::to_string(p) +
                    " unknowns");
  }

  Vector scale = design.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(scale(j) > 0.0) || !std::isfinite(scale(j))) {
      throw ConditioningError("least_squares: design column " + std::to_string(j) +
                                  " is zero or non-finite",
                              std::numeric_limits<double>::infinity());
    }
  }
  const Matrix equilibrated = design * scale.cwiseInverse().asDiagonal();

  Eigen::BDCSVD<Matrix> svd(equilibrated, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cond = s(p - 1) > 0.0 ? s(0) / s(p - 1) : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    throw ConditioningError("least_squares: design is rank deficient (condition number " +
                                std::to_string(cond) + ")",
                            cond);
  }

  Matrix coef = svd.matrixV() * s.cwiseInverse().asDiagonal() * (svd.matrixU().transpose() * rhs);
  coef = scale.cwiseInverse().asDiagonal() * coef;

  const Matrix residual = design * coef - rhs;
  const double rms = residual.size() > 0
                         ? std::sqrt(residual.squaredNorm() / static_cast<double>(residual.size()))
                         : 0.0;
  return {std::move(coef), cond, rms};
}

LeastSquaresSolution least_squares_with_intercept(const Matrix& design, const Matrix& rhs,
                                                  double max_condition) {
  Matrix augmented(design.rows(), design.cols() + 1);
  augmented.leftCols(design.cols()) = design;
  augmented.col(design.cols()).setOnes();
  return least_squares(augmented, rhs, max_condition);
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s(s.size() - 1);
  return smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
}

}  // namespace specquant
