#pragma once

#include "specquant/linear_model.hpp"
#include "specquant/plsr.hpp"
#include "specquant/training_free.hpp"

#include <filesystem>
#include <variant>

namespace specquant {

/// Constant predictor returning the training mean.
struct MeanModel {
  Vector mean;
  std::vector<std::string> gas_names;
  std::string fingerprint() const;
};

using QuantModel = std::variant<LrModel, DirectModel, TfModel, PlsrModel, MeanModel>;

std::string model_kind(const QuantModel& model);
std::string model_fingerprint(const QuantModel& model);
RowMatrix predict(const QuantModel& model, const RowMatrix& spectra);

/// Model directory: `model.json` (kind, metadata, fingerprints, scalars) plus
/// one CSV per matrix. Values are written with 17 significant digits.
void save_model(const QuantModel& model, const std::filesystem::path& dir);
QuantModel load_model(const std::filesystem::path& dir);

/// Dense matrix CSV (optional header row), 17 significant digits.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& header = {});
Matrix read_matrix_csv(const std::filesystem::path& path, bool has_header);

}  // namespace specquant
