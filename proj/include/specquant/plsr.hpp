#pragma once

#include "specquant/synthesizer.hpp"

#include <string>
#include <vector>

namespace specquant {

struct PlsrOptions {
  Eigen::Index components = 20;
  double tolerance = 1e-10;
  int max_iterations = 500;
  /// Start each inner loop from the dominant direction of Y^T X X^T Y instead
  /// of the highest-variance Y column.
  bool warm_start = true;
};

/// NIPALS PLS2 (all responses in one model) on mean-centered X and Y.
struct PlsrModel {
  Matrix x_weights;    // M x A
  Matrix x_loadings;   // M x A
  Matrix y_loadings;   // K x A
  Vector x_mean;       // M
  Vector y_mean;       // K
  Matrix regression;   // M x K
  std::vector<std::string> gas_names;
  std::vector<int> iterations;  // inner iterations per component
  Matrix train_scores;          // N x A X-scores; not serialized

  Eigen::Index components() const noexcept { return x_weights.cols(); }
  std::string fingerprint() const;
};

PlsrModel fit_plsr(const SpectraDataset& training, const PlsrOptions& options);
PlsrModel fit_plsr(const RowMatrix& x, const RowMatrix& y, const PlsrOptions& options);

RowMatrix predict_plsr(const PlsrModel& model, const RowMatrix& spectra);

}  // namespace specquant
