#pragma once

// Row-parallel kernels. Every kernel exists twice: a plain serial loop kept as
// the reference, and an OpenMP version that splits rows across threads. Both
// call the same per-row routine, so their outputs are bit-identical.

#include "specquant/linalg.hpp"
#include "specquant/synthesizer.hpp"

#include <cstdint>
#include <optional>

namespace specquant::kernels {

/// Everything needed to synthesize one mixture spectrum.
struct ForwardSetup {
  const RowMatrix* shapes = nullptr;  // K x M unit-norm extinction shapes
  Vector scaled_norms;                // b * |e_k|
  ConcentrationScheme scheme;
  std::optional<NoiseSpec> noise;
  std::uint64_t seed = 0;
};

/// Fills concentrations and absorbances for sample i (global index).
void synthesize_row(const ForwardSetup& setup, std::size_t i, double* absorbance_row,
                    double* concentration_row);

/// Adds -log10(1 + rho) noise, redrawing rho until 1 + rho > 0.
void add_intensity_noise(double* row, std::size_t m, double sigma, std::uint64_t stream_key);

/// scores(i, l) = sum_j w_j phi_l(j) (x_i(j) - offset(j))
void project_row(const double* x, const Vector& offset, const Vector& weights,
                 const Matrix& components, double* scores_row);

/// x_i = mean + sum_{l < count} scores(i, l) phi_l
void reconstruct_row(const double* scores_row, const Matrix& components, const Vector& mean,
                     Eigen::Index count, double* x);

namespace serial {

void synthesize_rows(const ForwardSetup& setup, std::size_t begin, RowMatrix& absorbances,
                     RowMatrix& concentrations);
RowMatrix project_rows(const RowMatrix& x, const Vector& offset, const Vector& weights,
                       const Matrix& components);
RowMatrix reconstruct_rows(const RowMatrix& scores, const Matrix& components, const Vector& mean,
                           Eigen::Index count);

}  // namespace serial

namespace omp {

void synthesize_rows(const ForwardSetup& setup, std::size_t begin, RowMatrix& absorbances,
                     RowMatrix& concentrations);
RowMatrix project_rows(const RowMatrix& x, const Vector& offset, const Vector& weights,
                       const Matrix& components);
RowMatrix reconstruct_rows(const RowMatrix& scores, const Matrix& components, const Vector& mean,
                           Eigen::Index count);

}  // namespace omp

}  // namespace specquant::kernels
