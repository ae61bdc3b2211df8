#include "specquant/training_free.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"

#include <cmath>

namespace specquant {

namespace {

constexpr double kMaxBetaCondition = 1e12;

// Centered PCA of K spectra yields at most K - 1 components; the mean's
// component outside their span completes the basis.
void complete_with_mean(PcBasis& basis, Eigen::Index k) {
  if (basis.size() != k - 1) {
    throw Error(ErrorCode::kDegenerateLibrary,
                "extinction spectra span only " + std::to_string(basis.size() + 1) +
                    " dimensions, need " + std::to_string(k));
  }
  const Vector& w = basis.weights();
  Vector residual = basis.mean;
  for (Eigen::Index l = 0; l < basis.size(); ++l) {
    residual -= basis.components.col(l).dot(basis.mean.cwiseProduct(w)) * basis.components.col(l);
  }
  const double mean_norm = std::sqrt(basis.mean.cwiseProduct(w).dot(basis.mean));
  const double res_norm = std::sqrt(residual.cwiseProduct(w).dot(residual));
  if (!(res_norm > 1e-10 * mean_norm)) {
    throw Error(ErrorCode::kDegenerateLibrary, "library mean lies in the span of its components");
  }
  residual /= res_norm;
  Eigen::Index at = 0;
  residual.cwiseAbs().maxCoeff(&at);
  if (residual(at) < 0.0) residual = -residual;
  basis.components.conservativeResize(Eigen::NoChange, k);
  basis.components.col(k - 1) = residual;
  basis.eigenvalues.conservativeResize(k);
  basis.eigenvalues(k - 1) = 0.0;
}

void require_calibration(const GasLibrary& lib, const SpectraDataset* calibration) {
  if (!calibration || calibration->size() < 2) {
    throw Error(ErrorCode::kUnderdetermined,
                "learning b or N' needs a calibration dataset with at least 2 samples");
  }
  require_same_grid(lib.grid(), calibration->grid, "fit_tf");
  if (calibration->gas_names != lib.names()) {
    throw Error(ErrorCode::kSchema, "calibration gases do not match the library order");
  }
}

}  // namespace

Matrix TfModel::system_matrix() const {
  Matrix s = path_length_cm * beta_prime.transpose() * eps_norms.asDiagonal();
  if (ridge > 0.0) s.diagonal().array() += ridge;
  return s;
}

Matrix TfModel::lambda() const {
  return system_matrix().colPivHouseholderQr().inverse();
}

Vector TfModel::bias() const {
  return -(system_matrix().colPivHouseholderQr().solve(noise_projection));
}

std::string TfModel::fingerprint() const {
  Fingerprint fp;
  fp.add("tf").add(basis.fingerprint());
  fp.add(std::span<const double>(beta_prime.data(), static_cast<std::size_t>(beta_prime.size())));
  fp.add(std::span<const double>(eps_norms.data(), static_cast<std::size_t>(eps_norms.size())));
  fp.add(path_length_cm);
  fp.add(std::span<const double>(noise_projection.data(),
                                 static_cast<std::size_t>(noise_projection.size())));
  fp.add(ridge);
  for (const auto& n : gas_names) fp.add(n);
  fp.add(library_fingerprint);
  return fp.hex();
}

TfModel fit_tf(const GasLibrary& lib, const TfOptions& options, const SpectraDataset* calibration) {
  const auto k = static_cast<Eigen::Index>(lib.size());
  if (k < 1) throw Error(ErrorCode::kConfiguration, "empty gas library");
  const bool learn_b = options.b_mode == PathLengthMode::kLearn;
  const bool learn_n = options.noise_mode == NoiseMode::kLearn;
  if (!learn_b && !(options.path_length_cm > 0.0)) {
    throw Error(ErrorCode::kConfiguration, "known path length must be positive");
  }
  if (learn_b || learn_n) require_calibration(lib, calibration);

  const RowMatrix& shapes = lib.shapes();
  TfModel model;
  if (options.centered) {
    if (k < 2) throw Error(ErrorCode::kDegenerateLibrary, "centered TF basis needs K >= 2");
    model.basis = fit_pca(shapes, lib.grid(), options.flavor, true, k - 1);
    complete_with_mean(model.basis, k);
  } else {
    model.basis = fit_pca(shapes, lib.grid(), options.flavor, false, k);
    if (model.basis.size() != k) {
      throw Error(ErrorCode::kDegenerateLibrary,
                  "extinction spectra have rank " + std::to_string(model.basis.size()) +
                      " < K = " + std::to_string(k));
    }
  }

  const RowMatrix beta = project(model.basis, shapes).scores;
  const Vector mean_projection =
      model.basis.components.transpose() * model.basis.mean.cwiseProduct(model.basis.weights());
  model.beta_prime = beta;
  model.beta_prime.rowwise() += mean_projection.transpose();

  model.condition_number = condition_number(model.beta_prime);
  if (!(model.condition_number < kMaxBetaCondition) && !(options.ridge > 0.0)) {
    throw Error(ErrorCode::kDegenerateLibrary,
                "beta' is singular (condition number " + std::to_string(model.condition_number) + ")");
  }
  model.eps_norms = lib.norms();
  model.ridge = options.ridge;
  model.gas_names = lib.names();
  model.library_fingerprint = lib.fingerprint();
  model.path_length_cm = options.path_length_cm;
  model.noise_projection = Vector::Zero(k);

  if (learn_b || learn_n) {
    const RowMatrix projected = project_uncentered(model.basis, calibration->absorbances);
    // g_i = beta'^T eps C_i, so A~_i = b g_i + N'
    const Matrix weights = model.beta_prime.transpose() * model.eps_norms.asDiagonal();
    const RowMatrix g = calibration->concentrations * weights.transpose();
    const double n = static_cast<double>(calibration->size());
    if (learn_b && learn_n) {
      const Vector g_mean = g.colwise().mean().transpose();
      const Vector a_mean = projected.colwise().mean().transpose();
      const RowMatrix gc = g.rowwise() - g_mean.transpose();
      const RowMatrix ac = projected.rowwise() - a_mean.transpose();
      const double ss = gc.squaredNorm();
      if (!(ss > 0.0)) {
        throw Error(ErrorCode::kUnderdetermined, "calibration concentrations do not vary");
      }
      model.path_length_cm = (gc.array() * ac.array()).sum() / ss;
      model.noise_projection = a_mean - model.path_length_cm * g_mean;
    } else if (learn_b) {
      const double ss = g.squaredNorm();
      if (!(ss > 0.0)) {
        throw Error(ErrorCode::kUnderdetermined, "calibration concentrations are all zero");
      }
      model.path_length_cm = (g.array() * projected.array()).sum() / ss;
    } else {
      model.noise_projection =
          (projected - model.path_length_cm * g).colwise().sum().transpose() / n;
    }
    if (!(model.path_length_cm > 0.0)) {
      throw ConditioningError("learned path length is not positive", model.condition_number);
    }
  }
  return model;
}

RowMatrix predict_tf(const TfModel& model, const RowMatrix& spectra) {
  const RowMatrix projected = project_uncentered(model.basis, spectra);
  const auto solver = model.system_matrix().colPivHouseholderQr();
  Matrix rhs = projected.transpose();
  rhs.colwise() -= model.noise_projection;
  return solver.solve(rhs).transpose();
}

SystemNoiseEstimate estimate_system_noise(const TfModel& model, const SpectraDataset& samples) {
  require_same_grid(model.basis.grid, samples.grid, "estimate_system_noise");
  if (samples.gas_count() != static_cast<std::size_t>(model.eps_norms.size())) {
    throw Error(ErrorCode::kDimension, "estimate_system_noise: gas count mismatch");
  }
  // sum_l beta'_{k,l} phi_l recovers the unit shape of gas k.
  const Matrix shapes = model.beta_prime * model.basis.components.transpose();
  const RowMatrix scaled =
      model.path_length_cm * (samples.concentrations * model.eps_norms.asDiagonal());
  SystemNoiseEstimate out;
  out.noise_spectra = samples.absorbances - scaled * shapes;
  out.mean_power = samples.size() ? out.noise_spectra.rowwise().squaredNorm().mean() : 0.0;
  return out;
}

}  // namespace specquant
