#include "specquant/linear_model.hpp"

#include "specquant/error.hpp"
#include "specquant/fingerprint.hpp"

#include <algorithm>
#include <numeric>

namespace specquant {

namespace {

void add_matrix(Fingerprint& fp, const Matrix& m) {
  fp.add(static_cast<std::uint64_t>(m.rows()));
  fp.add(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

void add_names(Fingerprint& fp, const std::vector<std::string>& names) {
  for (const auto& n : names) fp.add(n);
}

}  // namespace

OverlapNoiseEstimate estimate_overlap_noise(const PcBasis& basis, const SpectraDataset& training) {
  require_same_grid(basis.grid, training.grid, "estimate_overlap_noise");
  const auto n = training.size();
  const auto k = training.gas_count();
  if (n <= k + 1) {
    throw Error(ErrorCode::kUnderdetermined, "estimate_overlap_noise needs N > K + 1 (N = " +
                                                 std::to_string(n) + ", K = " + std::to_string(k) +
                                                 ")");
  }
  const RowMatrix scores = project(basis, training.absorbances).scores;
  const auto fit = least_squares_with_intercept(training.concentrations, scores);
  const auto kk = static_cast<Eigen::Index>(k);

  OverlapNoiseEstimate out;
  out.b_psi_eps = fit.coefficients.topRows(kk).transpose();
  out.mean_projection = basis.components.transpose() * basis.mean.cwiseProduct(basis.weights());
  out.expected_noise = fit.coefficients.row(kk).transpose() + out.mean_projection;
  out.residual_rms = fit.residual_rms;
  out.condition_number = fit.condition_number;
  return out;
}

std::string LrModel::fingerprint() const {
  Fingerprint fp;
  fp.add("lr").add(basis.fingerprint());
  add_matrix(fp, lambda);
  add_matrix(fp, kappa);
  add_names(fp, gas_names);
  return fp.hex();
}

std::string DirectModel::fingerprint() const {
  Fingerprint fp;
  fp.add("direct").add(basis.fingerprint());
  add_matrix(fp, lambda);
  add_matrix(fp, kappa);
  for (int m : retain_counts) fp.add(static_cast<std::uint64_t>(m));
  add_names(fp, gas_names);
  return fp.hex();
}

LrModel fit_lr_from_scores(const PcBasis& basis, const RowMatrix& scores,
                           const RowMatrix& concentrations, std::vector<std::string> gas_names) {
  const Eigen::Index n = scores.rows();
  const Eigen::Index l = scores.cols();
  if (concentrations.rows() != n) {
    throw Error(ErrorCode::kDimension, "fit_lr: scores and concentrations differ in length");
  }
  if (n <= l + 1) {
    throw Error(ErrorCode::kUnderdetermined,
                "fit_lr needs more than L + 1 = " + std::to_string(l + 1) +
                    " training samples, got " + std::to_string(n));
  }
  const auto fit = least_squares_with_intercept(scores, concentrations);
  LrModel model;
  model.basis = basis;
  model.lambda = fit.coefficients.topRows(l).transpose();
  model.kappa = fit.coefficients.row(l).transpose();
  model.gas_names = std::move(gas_names);
  model.in_sample_rmse = fit.residual_rms;
  model.condition_number = fit.condition_number;
  return model;
}

LrModel fit_lr(const PcBasis& basis, const SpectraDataset& training) {
  require_same_grid(basis.grid, training.grid, "fit_lr");
  const auto k = training.gas_count();
  if (training.size() <= k + 1) {
    throw Error(ErrorCode::kUnderdetermined, "fit_lr needs N > K + 1 (N = " +
                                                 std::to_string(training.size()) + ", K = " +
                                                 std::to_string(k) + ")");
  }
  const RowMatrix scores = project(basis, training.absorbances).scores;
  return fit_lr_from_scores(basis, scores, training.concentrations, training.gas_names);
}

RowMatrix apply_affine(const RowMatrix& scores, const Matrix& lambda, const Vector& kappa) {
  if (scores.cols() != lambda.cols()) {
    throw Error(ErrorCode::kDimension, "model expects " + std::to_string(lambda.cols()) +
                                           " scores, got " + std::to_string(scores.cols()));
  }
  RowMatrix out = scores * lambda.transpose();
  out.rowwise() += kappa.transpose();
  return out;
}

RowMatrix predict_lr(const LrModel& model, const RowMatrix& spectra) {
  return apply_affine(project(model.basis, spectra).scores, model.lambda, model.kappa);
}

DirectModel sparsify_to_direct_from_scores(const LrModel& model, const RowMatrix& scores,
                                           const RowMatrix& concentrations,
                                           const RetainSpec& retain) {
  const Eigen::Index k = model.lambda.rows();
  const Eigen::Index l = model.lambda.cols();
  if (scores.cols() != l || concentrations.cols() != k || scores.rows() != concentrations.rows()) {
    throw Error(ErrorCode::kDimension, "sparsify_to_direct: training data does not match the model");
  }
  std::vector<int> counts;
  if (std::holds_alternative<int>(retain)) {
    counts.assign(static_cast<std::size_t>(k), std::get<int>(retain));
  } else {
    counts = std::get<std::vector<int>>(retain);
    if (counts.size() != static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::kConfiguration, "sparsify_to_direct: need one retain count per gas");
    }
  }
  for (int m : counts) {
    if (m < 1 || m > l) {
      throw Error(ErrorCode::kConfiguration, "retain count must lie in [1, " + std::to_string(l) + "]");
    }
  }

  DirectModel out;
  out.basis = model.basis;
  out.lambda = Matrix::Zero(k, l);
  out.kappa = Vector::Zero(k);
  out.mask.setConstant(k, l, false);
  out.retain_counts = counts;
  out.gas_names = model.gas_names;

  for (Eigen::Index g = 0; g < k; ++g) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(l));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return std::abs(model.lambda(g, a)) > std::abs(model.lambda(g, b));
    });
    std::vector<Eigen::Index> kept(order.begin(), order.begin() + counts[static_cast<std::size_t>(g)]);
    std::sort(kept.begin(), kept.end());

    Matrix design(scores.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      design.col(static_cast<Eigen::Index>(c)) = scores.col(kept[c]);
    }
    const auto fit = least_squares_with_intercept(design, concentrations.col(g));
    for (std::size_t c = 0; c < kept.size(); ++c) {
      out.lambda(g, kept[c]) = fit.coefficients(static_cast<Eigen::Index>(c), 0);
      out.mask(g, kept[c]) = true;
    }
    out.kappa(g) = fit.coefficients(static_cast<Eigen::Index>(kept.size()), 0);
  }
  return out;
}

DirectModel sparsify_to_direct(const LrModel& model, const SpectraDataset& training,
                               const RetainSpec& retain) {
  require_same_grid(model.basis.grid, training.grid, "sparsify_to_direct");
  const RowMatrix scores = project(model.basis, training.absorbances).scores;
  return sparsify_to_direct_from_scores(model, scores, training.concentrations, retain);
}

RowMatrix predict_direct(const DirectModel& model, const RowMatrix& spectra) {
  return apply_affine(project(model.basis, spectra).scores, model.lambda, model.kappa);
}

}  // namespace specquant
