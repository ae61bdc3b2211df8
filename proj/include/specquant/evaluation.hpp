#pragma once

#include "specquant/model_io.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace specquant {

struct LrSpec {
  Eigen::Index components = 9;
  Flavor flavor = Flavor::kFunctional;
  bool centered = true;
};

struct DirectSpec {
  LrSpec base;
  RetainSpec retain = 1;
};

struct TfSpec {
  TfOptions options;
  std::shared_ptr<const GasLibrary> library;
  /// Calibrate on only the first n training samples.
  std::optional<std::size_t> calibration_samples;
};

struct PlsrSpec {
  PlsrOptions options;
};

/// Predicts the training mean: the random-guess baseline.
struct MeanSpec {};
/// Returns the true concentrations; harness sanity check.
struct OracleSpec {};

using ModelSpec = std::variant<LrSpec, DirectSpec, TfSpec, PlsrSpec, MeanSpec, OracleSpec>;

std::string describe(const ModelSpec& spec);

/// A trained model, or the truth oracle (no model).
struct FittedModel {
  std::optional<QuantModel> model;

  RowMatrix predict(const SpectraDataset& test) const;
  std::string fingerprint() const;
};

/// Fits every stage (including PCA) on `train` only.
FittedModel fit_model(const ModelSpec& spec, const SpectraDataset& train);

struct KFoldOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

/// Test-index sets of a seeded permutation; the last fold takes the remainder.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t folds,
                                                      std::uint64_t seed);
/// Complement of fold `f`, in ascending order.
std::vector<std::size_t> kfold_training_rows(const std::vector<std::vector<std::size_t>>& folds,
                                             std::size_t f);

struct GasErrors {
  Vector rmse;
  Vector mape;
  std::vector<std::size_t> mape_excluded;  // samples with zero true concentration
};

GasErrors gas_errors(const RowMatrix& truth, const RowMatrix& predicted);
/// Population standard deviation of each concentration column.
Vector random_guess_rmse(const RowMatrix& concentrations);

struct EvalReport {
  std::string model;
  std::string dataset;
  std::vector<std::string> gas_names;
  Vector per_gas_rmse;
  double mean_rmse = 0.0;
  Vector per_gas_mape;
  std::vector<std::size_t> mape_excluded;
  Vector random_guess_rmse;
  std::size_t fold_count = 0;
  Matrix fold_rmse;  // folds x K
  Vector fold_mean_rmse;
  std::vector<std::string> fold_fingerprints;
};

EvalReport kfold_evaluate(const ModelSpec& spec, const SpectraDataset& dataset,
                          const KFoldOptions& options = {});

struct PcSweepOptions {
  Eigen::Index min_components = 1;
  Eigen::Index max_components = 20;
  Flavor flavor = Flavor::kFunctional;
  bool centered = true;
  KFoldOptions kfold;
};

/// Held-out LR RMSE per (component count, gas). Row 0 of the internal table
/// is the intercept-only model, so delta is defined for the first count too.
struct PcSweep {
  std::vector<std::string> gas_names;
  std::vector<Eigen::Index> counts;
  Matrix rmse;   // counts x K
  Matrix delta;  // RMSE(l) - RMSE(l - 1)

  Vector mean_rmse() const;
};

PcSweep sweep_pc_count(const SpectraDataset& dataset, const PcSweepOptions& options);

struct SnrSweepRow {
  double snr_db;
  std::string model;
  double mean_rmse;
  Vector per_gas_rmse;
};

std::vector<SnrSweepRow> sweep_snr(const std::vector<const SpectraDataset*>& datasets,
                                   const std::vector<ModelSpec>& models,
                                   const KFoldOptions& options);

struct TrainingSizeOptions {
  std::vector<std::size_t> sizes;
  double test_fraction = 0.1;
  std::vector<std::uint64_t> seeds{0};
};

/// Mean RMSE per model, training size and seed; NaN where the model cannot
/// be fitted with that few samples.
struct TrainingSizeSweep {
  std::vector<std::string> models;
  std::vector<std::size_t> sizes;
  std::vector<std::uint64_t> seeds;
  std::vector<Matrix> mean_rmse;  // per model: sizes x seeds
  Matrix median_rmse;             // models x sizes

  /// Median over seeds, or NaN when no seed was feasible.
  double median(std::size_t model, std::size_t size_index) const;
};

TrainingSizeSweep sweep_training_size(const SpectraDataset& dataset,
                                      const std::vector<ModelSpec>& models,
                                      const TrainingSizeOptions& options);

/// MAPE(c) ~ max(gamma, a / c).
struct SaturationFit {
  double gamma = 0.0;
  double a = 0.0;
  double c_th = 0.0;      // a / gamma
  double residual = 0.0;  // RMS of (y - gamma) over plateau bins
  std::size_t plateau_bins = 0;
};

/// Least squares in log space over the knee position; bins with
/// non-positive or non-finite values are ignored.
SaturationFit fit_saturation(const Vector& centers, const Vector& values);

struct BinnedCurve {
  Vector lower, upper, centers;  // bin edges and geometric centers (M)
  Vector mape_mean, mape_std;    // mean / std over folds of per-fold bin MAPE
  Vector median_ape;             // mean over folds of per-fold bin median APE
  Vector q20_ape, q80_ape;       // middle 60% of APE, mean over folds
  std::vector<std::size_t> counts;  // samples per bin, summed over folds
};

struct OutOfRangeCurve {
  std::string model;
  std::string gas;
  BinnedCurve in_range;
  BinnedCurve out_of_range;
  SaturationFit fit;  // on out_of_range.median_ape
  Vector fold_gamma;
  Vector fold_c_th;
  double gamma_std = 0.0;
  std::vector<std::size_t> empty_bins;  // flagged, skipped in the fit
};

struct OutOfRangeOptions {
  std::size_t bins = 22;
  KFoldOptions kfold;
  std::vector<std::size_t> gases;  // empty: all
};

/// Trains on each fold of `train` (in-range), then predicts that fold's
/// held-out part and the whole of `test` (wider concentration range).
std::vector<OutOfRangeCurve> out_of_range_study(const SpectraDataset& train,
                                                const SpectraDataset& test,
                                                const std::vector<ModelSpec>& models,
                                                const OutOfRangeOptions& options);

/// Quantile (linear interpolation) of finite values; NaN when none.
double quantile(std::vector<double> values, double q);

}  // namespace specquant
