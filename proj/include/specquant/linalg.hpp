#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace specquant {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Sample-major storage: one spectrum (or one concentration vector) per row.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ordinary least squares `design * coef ~= rhs` solved through an SVD of the
/// column-equilibrated design matrix.
struct LeastSquaresSolution {
  Matrix coefficients;       // cols(design) x cols(rhs)
  double condition_number;   // of the equilibrated design
  double residual_rms;       // over all rhs entries
};

/// Designs with fewer rows than columns raise kUnderdetermined; designs whose
/// equilibrated condition number exceeds `max_condition` raise ConditioningError.
LeastSquaresSolution least_squares(const Matrix& design, const Matrix& rhs,
                                   double max_condition = 1e12);

/// Same as least_squares() with a column of ones appended to the design; the
/// intercept lands in the last row of the coefficients.
LeastSquaresSolution least_squares_with_intercept(const Matrix& design, const Matrix& rhs,
                                                  double max_condition = 1e12);

/// 2-norm condition number of a small dense matrix.
double condition_number(const Matrix& m);

}  // namespace specquant
