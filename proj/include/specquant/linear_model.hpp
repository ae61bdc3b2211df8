#pragma once

#include "specquant/pca.hpp"
#include "specquant/synthesizer.hpp"

#include <string>
#include <variant>
#include <vector>

namespace specquant {

/// Least-squares estimate of the score model beta = (b psi eps) C + (N - u).
struct OverlapNoiseEstimate {
  Matrix b_psi_eps;         // L x K
  Vector expected_noise;    // E{<phi_p|n>}, L
  Vector mean_projection;   // <phi_p|u>, L
  double residual_rms = 0.0;
  double condition_number = 0.0;
};

/// Requires N > K + 1.
OverlapNoiseEstimate estimate_overlap_noise(const PcBasis& basis, const SpectraDataset& training);

/// Affine map from PC scores to concentrations: C = Lambda beta + kappa.
struct LrModel {
  PcBasis basis;
  Matrix lambda;  // K x L
  Vector kappa;   // K
  std::vector<std::string> gas_names;
  double in_sample_rmse = 0.0;
  double condition_number = 0.0;

  std::string fingerprint() const;
};

/// Per-gas ordinary least squares of concentrations on scores with intercept.
LrModel fit_lr(const PcBasis& basis, const SpectraDataset& training);
/// Same, from precomputed training scores (N x L).
LrModel fit_lr_from_scores(const PcBasis& basis, const RowMatrix& scores,
                           const RowMatrix& concentrations, std::vector<std::string> gas_names);

RowMatrix predict_lr(const LrModel& model, const RowMatrix& spectra);
RowMatrix apply_affine(const RowMatrix& scores, const Matrix& lambda, const Vector& kappa);

/// Lambda with only the leading m entries of each row kept, refitted.
struct DirectModel {
  PcBasis basis;
  Matrix lambda;  // K x L, zero outside the mask
  Vector kappa;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  std::vector<int> retain_counts;
  std::vector<std::string> gas_names;

  std::string fingerprint() const;
};

/// Either one m for every gas, or one per gas.
using RetainSpec = std::variant<int, std::vector<int>>;

/// Keeps the m largest-|value| entries of each row of Lambda and refits
/// (coefficients and intercept) by least squares on the training scores.
DirectModel sparsify_to_direct(const LrModel& model, const SpectraDataset& training,
                               const RetainSpec& retain);
DirectModel sparsify_to_direct_from_scores(const LrModel& model, const RowMatrix& scores,
                                           const RowMatrix& concentrations,
                                           const RetainSpec& retain);

RowMatrix predict_direct(const DirectModel& model, const RowMatrix& spectra);

}  // namespace specquant
