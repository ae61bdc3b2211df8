#pragma once

#include "specquant/spectral_core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace specquant {

/// Functional PCA integrates with trapezoidal weights; plain PCA uses the
/// ordinary dot product.
enum class Flavor { kFunctional, kPlain };

Weighting weighting_of(Flavor flavor) noexcept;
std::string to_string(Flavor flavor);
Flavor parse_flavor(const std::string& text);

/// Ordered principal components with the mean they were centered on.
///
/// Components are orthonormal under the flavor's weighting, and each one is
/// signed so that its largest-magnitude entry is positive.
struct PcBasis {
  GridPtr grid;
  Matrix components;   // M x L, column l is phi_l
  Vector mean;         // M, zero when uncentered
  Vector eigenvalues;  // L, descending, singular_value^2 / (N - 1)
  double total_variance = 0.0;  // sum of all eigenvalues, including the truncated tail
  Flavor flavor = Flavor::kFunctional;
  bool centered = true;
  std::size_t sample_count = 0;
  std::size_t effective_rank = 0;  // numerical rank of the data

  Eigen::Index size() const noexcept { return components.cols(); }
  const Vector& weights() const { return grid->weights(weighting_of(flavor)); }
  /// First `count` components only.
  PcBasis truncated(Eigen::Index count) const;
  std::string fingerprint() const;
};

/// fit_pca() rejects singular values below this fraction of the largest.
inline constexpr double kRankTolerance = 1e-12;

/// PCA of the N x M data matrix via SVD of the (weighted, centered) data.
/// Returns min(max_components, numerical rank) components.
PcBasis fit_pca(const RowMatrix& data, GridPtr grid, Flavor flavor, bool centered,
                Eigen::Index max_components);

struct ExplainedVariance {
  Vector individual;  // IEV
  Vector cumulative;  // CEV
};

ExplainedVariance explained_variance(const PcBasis& basis, Eigen::Index up_to);

struct ScoreMatrix {
  RowMatrix scores;  // N x L
  std::string basis_fingerprint;
};

/// beta(i, l) = <phi_l | A_i - u> under the flavor's weighting.
ScoreMatrix project(const PcBasis& basis, const RowMatrix& data);
/// <phi_l | A_i> without removing the mean.
RowMatrix project_uncentered(const PcBasis& basis, const RowMatrix& data);

/// u + sum_{l < up_to} beta(i, l) phi_l per row.
RowMatrix reconstruct(const PcBasis& basis, const RowMatrix& scores, Eigen::Index up_to);

struct ReconstructionMetrics {
  double rmse = 0.0;       // per-sample RMSE averaged over samples
  double delta_rho = 0.0;  // mean of 1 - rho_i over rows with defined rho
  std::size_t excluded_rows = 0;
};

ReconstructionMetrics reconstruction_metrics(const RowMatrix& original,
                                             const RowMatrix& reconstructed);

struct ComponentAgreement {
  double rmse;
  double r_squared;
};

/// Per-component RMSE and squared Pearson correlation between two bases, after
/// flipping b's sign to match a and scaling both to unit Euclidean norm.
std::vector<ComponentAgreement> compare_flavors(const PcBasis& a, const PcBasis& b,
                                                Eigen::Index up_to);

/// `components.csv` (one column per component, plus the mean) and
/// `basis.json` (eigenvalues, flavor, fingerprint).
void save_basis(const PcBasis& basis, const std::filesystem::path& dir);
PcBasis load_basis(const std::filesystem::path& dir);

}  // namespace specquant
