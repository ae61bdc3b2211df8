#pragma once

#include "specquant/gas_library.hpp"
#include "specquant/pca.hpp"
#include "specquant/synthesizer.hpp"

#include <string>
#include <vector>

namespace specquant {

enum class PathLengthMode { kKnown, kLearn };
enum class NoiseMode { kZero, kLearn };

struct TfOptions {
  Flavor flavor = Flavor::kFunctional;
  bool centered = false;
  PathLengthMode b_mode = PathLengthMode::kKnown;
  double path_length_cm = kDefaultPathLengthCm;  // used when b_mode is kKnown
  NoiseMode noise_mode = NoiseMode::kZero;
  /// Ridge added to the K x K system before factoring; 0 disables.
  double ridge = 0.0;
};

/// Quantifier whose basis comes from the extinction spectra themselves:
/// A~ = b beta'^T eps C + N', solved for C.
struct TfModel {
  PcBasis basis;           // K components fitted on the K unit-norm shapes
  Matrix beta_prime;       // K x K, row k gas, column p component
  Vector eps_norms;        // K
  double path_length_cm = 0.0;
  Vector noise_projection; // N', K
  double condition_number = 0.0;
  double ridge = 0.0;
  std::vector<std::string> gas_names;
  std::string library_fingerprint;

  /// b beta'^T eps (+ ridge I)
  Matrix system_matrix() const;
  /// Affine form C = Lambda A~ + bias.
  Matrix lambda() const;
  Vector bias() const;
  std::string fingerprint() const;
};

/// `calibration` is required when b or N' is learned (at least 2 samples).
TfModel fit_tf(const GasLibrary& lib, const TfOptions& options,
               const SpectraDataset* calibration = nullptr);

RowMatrix predict_tf(const TfModel& model, const RowMatrix& spectra);

struct SystemNoiseEstimate {
  RowMatrix noise_spectra;  // N x M
  double mean_power = 0.0;  // mean of <n_i|n_i>, unit weighting
};

SystemNoiseEstimate estimate_system_noise(const TfModel& model, const SpectraDataset& samples);

}  // namespace specquant
